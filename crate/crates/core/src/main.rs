fn main() {
    std::process::exit(polydef::cli::run());
}
