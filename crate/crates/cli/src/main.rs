fn main() {
    std::process::exit(csalsa_cli::run(std::env::args_os()));
}
