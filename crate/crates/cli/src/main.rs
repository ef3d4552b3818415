fn main() {
    std::process::exit(eo_cli::run(std::env::args_os()));
}
