fn main() {
    std::process::exit(tulap_cli::run(std::env::args_os()));
}
