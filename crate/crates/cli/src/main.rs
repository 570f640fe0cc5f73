fn main() {
    std::process::exit(facinv_cli::run(std::env::args_os()));
}
