fn main() {
    std::process::exit(hompss_cli::run(std::env::args_os()));
}
