fn main() {
    std::process::exit(folint::cli::run(std::env::args_os()));
}
