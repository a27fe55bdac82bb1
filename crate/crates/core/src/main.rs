fn main() {
    std::process::exit(cohres::cli::run(std::env::args_os()));
}
