fn main() {
    std::process::exit(infodim::cli::run(std::env::args_os()));
}
