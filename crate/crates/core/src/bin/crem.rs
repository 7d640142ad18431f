fn main() {
    std::process::exit(crem::cli::run(std::env::args_os()));
}
