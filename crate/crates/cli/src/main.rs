fn main() {
    std::process::exit(kreinspec_cli::run(std::env::args_os()));
}
