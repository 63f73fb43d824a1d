fn main() {
    std::process::exit(igplab::cli::run(std::env::args().collect()));
}
