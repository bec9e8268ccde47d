fn main() {
    std::process::exit(geodesic_lab::cli::run_from_args());
}
