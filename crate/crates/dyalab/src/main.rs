fn main() {
    std::process::exit(dyalab::cli::run_cli(std::env::args_os()));
}
