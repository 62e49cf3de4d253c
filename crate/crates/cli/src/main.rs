fn main() {
    std::process::exit(filtkit_cli::run(std::env::args_os()));
}
