use proptest::prelude::*;
use tactile_placement::prelude::*;

fn bits(n: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), n)
}

/// `(num_sites, rows)` with rows of `(bits, success_rate)`.
fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (1usize..=12, 3usize..=30).prop_flat_map(|(sites, n)| {
        prop::collection::vec((bits(sites), 0.0f64..=1.0), n).prop_map(move |rows| {
            let records = rows
                .into_iter()
                .enumerate()
                .map(|(i, (b, y))| {
                    ExperimentRecord::new(format!("r{i}"), SensorConfiguration::new(b), "t", y)
                        .unwrap()
                })
                .collect();
            Dataset::new(SensorLayout::generic(sites).unwrap(), records).unwrap()
        })
    })
}

fn rebuild(ds: &Dataset, records: Vec<ExperimentRecord>) -> Dataset {
    Dataset::new(ds.layout().clone(), records).unwrap()
}

fn with_targets(ds: &Dataset, f: impl Fn(f64) -> f64) -> Dataset {
    rebuild(
        ds,
        ds.records()
            .iter()
            .map(|r| {
                ExperimentRecord::new(
                    r.config_id.clone(),
                    r.config.clone(),
                    "t",
                    f(r.success_rate),
                )
                .unwrap()
            })
            .collect(),
    )
}

fn non_constant(ds: &Dataset) -> bool {
    let y = ds.targets();
    y.iter().any(|v| (v - y[0]).abs() > 1e-6)
}

fn close(a: &[Option<f64>], b: &[Option<f64>], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => (x - y).abs() < tol,
            (None, None) => true,
            _ => false,
        })
}

fn predictor_strategy(max_sites: usize) -> impl Strategy<Value = TunedPredictor> {
    (1usize..=max_sites, 0.0f64..0.5, 0.05f64..0.5).prop_flat_map(|(n, p0, span)| {
        prop::collection::vec(-0.5f64..1.0, n).prop_map(move |w| {
            TunedPredictor::new(PredictorAnchors::new(p0, p0 + span).unwrap(), w, "generic")
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pearson_weights_are_bounded(ds in dataset_strategy()) {
        prop_assume!(non_constant(&ds));
        let report = pearson_weights(&ds).unwrap();
        for w in report.weights.iter().flatten() {
            prop_assert!((-1.0..=1.0).contains(w));
        }
    }

    #[test]
    fn pearson_sign_flip_negates_one_site(ds in dataset_strategy(), pick in any::<prop::sample::Index>()) {
        prop_assume!(non_constant(&ds));
        let site = pick.index(ds.num_sites());
        let flipped = rebuild(&ds, ds.records().iter().map(|r| {
            let mut b = r.config.bits().to_vec();
            b[site] = !b[site];
            ExperimentRecord::new(r.config_id.clone(), SensorConfiguration::new(b), "t", r.success_rate).unwrap()
        }).collect());
        let mut expected = pearson_weights(&ds).unwrap().weights;
        expected[site] = expected[site].map(|w| -w);
        prop_assert!(close(&pearson_weights(&flipped).unwrap().weights, &expected, 1e-12));
    }

    #[test]
    fn pearson_affine_invariance(ds in dataset_strategy(), a in 0.05f64..0.5, b in 0.0f64..0.5) {
        prop_assume!(non_constant(&ds));
        let base = pearson_weights(&ds).unwrap().weights;
        let scaled = pearson_weights(&with_targets(&ds, |y| a * y + b)).unwrap().weights;
        prop_assert!(close(&base, &scaled, 1e-10));
        let negated: Vec<Option<f64>> = base.iter().map(|w| w.map(|v| -v)).collect();
        let reflected = pearson_weights(&with_targets(&ds, |y| 1.0 - a * y)).unwrap().weights;
        prop_assert!(close(&negated, &reflected, 1e-10));
    }

    #[test]
    fn pearson_ignores_record_order(ds in dataset_strategy(), seed in any::<u64>()) {
        prop_assume!(non_constant(&ds));
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut records = ds.records().to_vec();
        records.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let shuffled = rebuild(&ds, records);
        prop_assert!(close(&pearson_weights(&ds).unwrap().weights, &pearson_weights(&shuffled).unwrap().weights, 1e-12));
    }

    #[test]
    fn ols_residuals_are_orthogonal(ds in dataset_strategy()) {
        let fit = fit_ols(&ds).unwrap();
        let residuals: Vec<f64> = ds.records().iter()
            .map(|r| r.success_rate - fit.predict(&r.config).unwrap())
            .collect();
        prop_assert!(residuals.iter().sum::<f64>().abs() < 1e-9);
        for s in 0..ds.num_sites() {
            let d: f64 = ds.column(s).iter().zip(&residuals).map(|(x, r)| x * r).sum();
            prop_assert!(d.abs() < 1e-9);
        }
    }

    #[test]
    fn ols_duplicated_rows_give_same_fit(ds in dataset_strategy()) {
        let doubled = rebuild(&ds, ds.records().iter().chain(ds.records()).cloned().collect());
        let a = fit_ols(&ds).unwrap();
        let b = fit_ols(&doubled).unwrap();
        for r in ds.records() {
            prop_assert!((a.predict(&r.config).unwrap() - b.predict(&r.config).unwrap()).abs() < 1e-9);
        }
        prop_assert!((a.training_rmse - b.training_rmse).abs() < 1e-9);
    }

    #[test]
    fn normalized_update_preserves_sum(
        w in prop::collection::vec(-2.0f64..2.0, 1..25),
        pick in any::<prop::sample::Index>(),
        delta in -0.5f64..0.5,
    ) {
        let site = pick.index(w.len());
        let out = normalized_update(&w, site, delta);
        let before: f64 = w.iter().sum();
        let after: f64 = out.iter().sum();
        prop_assert!((before - after).abs() < 1e-9);
        if w.len() > 1 {
            prop_assert!((out[site] - w[site] - delta).abs() < 1e-12);
        }
    }

    #[test]
    fn predictions_stay_in_unit_interval(p in predictor_strategy(21), seed in any::<u64>()) {
        let layout = SensorLayout::generic(p.len()).unwrap();
        for c in random_configurations(&layout, 20, seed) {
            let v = p.predict(&c).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn predictor_json_round_trip(p in predictor_strategy(21)) {
        let back = TunedPredictor::from_json(&p.to_json()).unwrap();
        prop_assert_eq!(back.weights, p.weights);
        prop_assert_eq!(back.anchors, p.anchors);
    }

    #[test]
    fn layout_cost_is_monotone_and_subadditive(
        costs in prop::collection::vec(0.0f64..100.0, 1..22),
        seed_a in any::<u64>(),
        seed_b in any::<u64>(),
    ) {
        let n = costs.len();
        let sites = SensorLayout::generic(n).unwrap().sites().iter().zip(&costs)
            .map(|(s, &cost)| SensorSite { cost, ..s.clone() })
            .collect();
        let layout = SensorLayout::new("costed", sites).unwrap();
        let a = &random_configurations(&layout, 1, seed_a)[0];
        let b = &random_configurations(&layout, 1, seed_b)[0];
        let union = a.union(b).unwrap();
        let ca = layout.total_cost(a).unwrap();
        let cb = layout.total_cost(b).unwrap();
        let cu = layout.total_cost(&union).unwrap();
        prop_assert!(cu >= ca - 1e-9 && cu >= cb - 1e-9);
        prop_assert!(cu <= ca + cb + 1e-9);
        prop_assert_eq!(SensorLayout::from_json(&layout.to_json()).unwrap(), layout);
    }

    #[test]
    fn dataset_csv_round_trip(ds in dataset_strategy()) {
        let back = Dataset::from_csv(&ds.to_csv(), ds.layout()).unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn split_partitions_records(ds in dataset_strategy(), frac in 0.05f64..0.95, seed in any::<u64>()) {
        let (train, val) = ds.split(frac, seed).unwrap();
        prop_assert_eq!(train.len() + val.len(), ds.len());
        prop_assert!(!train.is_empty() && !val.is_empty());
        let mut ids: Vec<&str> = train.records().iter().chain(val.records()).map(|r| r.config_id.as_str()).collect();
        ids.sort();
        let mut all: Vec<&str> = ds.records().iter().map(|r| r.config_id.as_str()).collect();
        all.sort();
        prop_assert_eq!(ids, all);
        let again = ds.split(frac, seed).unwrap();
        prop_assert_eq!(again.0, train);
    }

    #[test]
    fn search_respects_budget(p in predictor_strategy(12), budget in 0.0f64..13.0) {
        let layout = SensorLayout::generic(p.len()).unwrap();
        let best = exhaustive_search(&p, &layout, budget).unwrap();
        prop_assert!(best.cost <= budget + 1e-9);
        prop_assert_eq!(best.predicted, p.predict(&best.config).unwrap());
        // Nothing cheaper or equal improves on it.
        let frontier = pareto_frontier(&p, &layout).unwrap();
        for w in frontier.points.windows(2) {
            prop_assert!(w[0].cost < w[1].cost && w[0].predicted < w[1].predicted);
        }
        let reachable = frontier.points.iter().filter(|pt| pt.cost <= budget + 1e-9).map(|pt| pt.predicted).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((reachable - best.predicted).abs() < 1e-12);
    }

    #[test]
    fn best_k_has_exactly_k_sites(p in predictor_strategy(21), pick in any::<prop::sample::Index>()) {
        let layout = SensorLayout::generic(p.len()).unwrap();
        let k = pick.index(p.len() + 1);
        let best = best_k_subset(&p, &layout, k).unwrap();
        prop_assert_eq!(best.config.count_ones(), k);
    }

    #[test]
    fn flip_expectation_is_affine_in_p(
        w in prop::collection::vec(0.0f64..1.0, 1..22),
        seed in any::<u64>(),
        p in 0.0f64..=0.5,
    ) {
        // Positive weights summing to at most one keep every value unclamped.
        let total: f64 = w.iter().sum::<f64>().max(1e-9);
        let pred = TunedPredictor::new(
            PredictorAnchors::new(0.28, 0.392).unwrap(),
            w.iter().map(|v| v / total).collect(),
            "g",
        );
        let layout = SensorLayout::generic(w.len()).unwrap();
        let x = &random_configurations(&layout, 1, seed)[0];
        let at = |q: f64| expected_under_flips(&pred, x, NoiseLevel::new(q).unwrap()).unwrap();
        let e0 = at(0.0);
        let e_half = at(0.5);
        prop_assert!((at(p) - (e0 + 2.0 * p * (e_half - e0))).abs() < 1e-12);

        // x and its complement average to the configuration-free value.
        let complement = SensorConfiguration::new(x.bits().iter().map(|b| !b).collect());
        let ec = expected_under_flips(&pred, &complement, NoiseLevel::new(p).unwrap()).unwrap();
        prop_assert!((at(p) + ec - 2.0 * e_half).abs() < 1e-12);
    }
}

#[test]
fn random_configurations_are_fair_per_bit() {
    let layout = SensorLayout::builtin_shadow21();
    let configs = random_configurations(&layout, 10_000, 42);
    for site in 0..21 {
        let mean = configs.iter().filter(|c| c.bits()[site]).count() as f64 / 10_000.0;
        // 0.5 ± 4 standard errors (sd of the mean is 0.005).
        assert!((mean - 0.5).abs() < 0.02, "site {site}: {mean}");
    }
}
