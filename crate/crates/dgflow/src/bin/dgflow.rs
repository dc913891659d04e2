fn main() {
    std::process::exit(dgflow::cli::run_cli(std::env::args_os()));
}
