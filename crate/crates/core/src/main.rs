fn main() {
    std::process::exit(tactile_placement::cli::main_with_args(std::env::args_os()));
}
