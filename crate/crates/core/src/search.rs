//! Cost-aware search over sensor configurations under a tuned predictor.
//!
//! Exhaustive modes enumerate all `2^N` configurations as bit masks (site
//! `i` at bit `i`). The mask range is cut into fixed-size chunks that rayon
//! may process in any order; chunk results are merged under a total order,
//! so the answer does not depend on the number of worker threads.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::dataset::SensorConfiguration;
use crate::error::{Error, Result};
use crate::hybrid::TunedPredictor;
use crate::layout::SensorLayout;

/// Largest layout the exhaustive modes will enumerate.
pub const MAX_EXHAUSTIVE_SITES: usize = 25;

/// Absolute slack when comparing a configuration cost with a budget.
pub const BUDGET_SLACK: f64 = 1e-9;

const CHUNK_BITS: u32 = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub config: SensorConfiguration,
    pub predicted: f64,
    pub cost: f64,
}

/// Non-dominated results, strictly increasing in both cost and prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFrontier {
    pub points: Vec<SearchResult>,
}

impl ParetoFrontier {
    /// `cost,predicted,bits` with bits as a 0/1 string in site order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cost,predicted,bits\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.cost, p.predicted, p.config));
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    mask: u64,
    cost: f64,
    predicted: f64,
}

/// Site 0 is the most significant position: the smaller mask is the one
/// holding a 0 at the first differing site.
fn lex_cmp(a: u64, b: u64) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let first = (a ^ b).trailing_zeros();
    if a >> first & 1 == 0 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Best first: higher prediction, then lower cost, then smaller bits.
fn best_order(a: &Point, b: &Point) -> Ordering {
    b.predicted
        .total_cmp(&a.predicted)
        .then(a.cost.total_cmp(&b.cost))
        .then(lex_cmp(a.mask, b.mask))
}

/// Frontier sweep order: cheaper first, then better, then smaller bits.
fn frontier_order(a: &Point, b: &Point) -> Ordering {
    a.cost
        .total_cmp(&b.cost)
        .then(b.predicted.total_cmp(&a.predicted))
        .then(lex_cmp(a.mask, b.mask))
}

struct Evaluator<'a> {
    predictor: &'a TunedPredictor,
    costs: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(predictor: &'a TunedPredictor, layout: &SensorLayout) -> Result<Self> {
        Error::check_dim(layout.len(), predictor.len())?;
        Ok(Evaluator {
            predictor,
            costs: layout.costs(),
        })
    }

    /// Sums run in site order, matching `predict` and `total_cost`.
    fn point(&self, mask: u64) -> Point {
        let (mut sum, mut cost) = (0.0, 0.0);
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            sum += self.predictor.weights[i];
            cost += self.costs[i];
            rest &= rest - 1;
        }
        Point {
            mask,
            cost,
            predicted: self.predictor.predict_from_sum(sum),
        }
    }

    fn result(&self, p: Point) -> SearchResult {
        SearchResult {
            config: SensorConfiguration::from_mask(self.costs.len(), p.mask),
            predicted: p.predicted,
            cost: p.cost,
        }
    }
}

fn chunks(n: usize) -> impl ParallelIterator<Item = std::ops::Range<u64>> {
    let total = 1u64 << n;
    let size = 1u64 << CHUNK_BITS.min(n as u32);
    (0..total / size)
        .into_par_iter()
        .map(move |c| c * size..(c + 1) * size)
}

fn check_exhaustive(n: usize) -> Result<()> {
    if n > MAX_EXHAUSTIVE_SITES {
        Err(Error::LayoutTooLarge {
            n,
            max: MAX_EXHAUSTIVE_SITES,
        })
    } else {
        Ok(())
    }
}

/// The `k` sites with the largest coefficients (ties by ascending id).
/// Optimal among all `k`-site configurations under uniform costs.
pub fn best_k_subset(
    predictor: &TunedPredictor,
    layout: &SensorLayout,
    k: usize,
) -> Result<SearchResult> {
    let n = layout.len();
    Error::check_dim(n, predictor.len())?;
    if k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let config = SensorConfiguration::from_sites(n, top_sites(predictor).into_iter().take(k));
    Ok(SearchResult {
        predicted: predictor.predict(&config)?,
        cost: layout.total_cost(&config)?,
        config,
    })
}

fn top_sites(predictor: &TunedPredictor) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..predictor.len()).collect();
    ids.sort_by(|&a, &b| {
        predictor.weights[b]
            .total_cmp(&predictor.weights[a])
            .then(a.cmp(&b))
    });
    ids
}

/// Highest-predicted configuration with cost within `budget`; ties go to
/// the cheaper, then lexicographically smaller configuration.
pub fn exhaustive_search(
    predictor: &TunedPredictor,
    layout: &SensorLayout,
    budget: f64,
) -> Result<SearchResult> {
    if budget.is_nan() || budget < 0.0 {
        return Err(Error::InvalidSetting(format!(
            "budget {budget} must be >= 0"
        )));
    }
    let n = layout.len();
    check_exhaustive(n)?;
    let eval = Evaluator::new(predictor, layout)?;

    let best = chunks(n)
        .filter_map(|range| {
            range
                .map(|mask| eval.point(mask))
                .filter(|p| p.cost <= budget + BUDGET_SLACK)
                .min_by(best_order)
        })
        .min_by(best_order)
        .expect("the empty configuration is always feasible");
    Ok(eval.result(best))
}

fn sweep(mut points: Vec<Point>) -> Vec<Point> {
    points.sort_by(frontier_order);
    let mut out: Vec<Point> = Vec::new();
    for p in points {
        if out.last().is_none_or(|last| p.predicted > last.predicted) {
            out.push(p);
        }
    }
    out
}

/// Non-dominated `(cost, predicted)` configurations by ascending cost.
/// Layouts above [`MAX_EXHAUSTIVE_SITES`] fall back to the top-k family,
/// which is exact only for uniform costs.
pub fn pareto_frontier(
    predictor: &TunedPredictor,
    layout: &SensorLayout,
) -> Result<ParetoFrontier> {
    let n = layout.len();
    let eval = Evaluator::new(predictor, layout)?;

    let points = if n <= MAX_EXHAUSTIVE_SITES {
        let partials: Vec<Vec<Point>> = chunks(n)
            .map(|range| sweep(range.map(|mask| eval.point(mask)).collect()))
            .collect();
        sweep(partials.into_iter().flatten().collect())
    } else if layout.has_uniform_costs() && n <= 64 {
        let order = top_sites(predictor);
        let mut mask = 0u64;
        let mut family = vec![eval.point(0)];
        for &site in &order {
            mask |= 1 << site;
            family.push(eval.point(mask));
        }
        sweep(family)
    } else {
        return Err(Error::LayoutTooLarge {
            n,
            max: MAX_EXHAUSTIVE_SITES,
        });
    };

    Ok(ParetoFrontier {
        points: points.into_iter().map(|p| eval.result(p)).collect(),
    })
}
