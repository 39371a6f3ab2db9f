fn main() {
    std::process::exit(amct::cli::run());
}
