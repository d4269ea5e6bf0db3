fn main() {
    std::process::exit(epsd::cli::run(std::env::args_os()));
}
