fn main() {
    std::process::exit(laxtop::cli::run(std::env::args_os()));
}
