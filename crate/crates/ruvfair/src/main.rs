fn main() {
    std::process::exit(ruvfair::cli::run_cli(std::env::args_os()));
}
