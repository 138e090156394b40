fn main() {
    std::process::exit(inr_restore::cli::run_cli(std::env::args_os()));
}
