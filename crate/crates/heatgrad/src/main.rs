fn main() {
    let code = heatgrad::cli::run_command(std::env::args());
    std::process::exit(code);
}
