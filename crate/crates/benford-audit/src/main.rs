fn main() {
    std::process::exit(benford_audit::cli::run());
}
