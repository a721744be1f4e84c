fn main() {
    std::process::exit(imog::cli::run_cli(std::env::args_os()));
}
