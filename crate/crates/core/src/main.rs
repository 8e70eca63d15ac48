fn main() {
    std::process::exit(revkit::cli::run_main());
}
