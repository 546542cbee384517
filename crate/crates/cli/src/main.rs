fn main() {
    std::process::exit(pvnne_cli::run(std::env::args_os()));
}
