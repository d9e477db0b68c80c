fn main() {
    std::process::exit(tripwell::cli::run(std::env::args_os()));
}
