fn main() {
    std::process::exit(hardgrid::cli::run());
}
