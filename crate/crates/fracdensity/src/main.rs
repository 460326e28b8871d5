fn main() {
    std::process::exit(fracdensity::cli::run());
}
