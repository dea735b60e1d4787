fn main() {
    std::process::exit(ite_conformal::cli::run(std::env::args_os()));
}
