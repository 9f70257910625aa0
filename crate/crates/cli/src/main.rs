fn main() {
    std::process::exit(tauberkit_cli::run(std::env::args_os()));
}
