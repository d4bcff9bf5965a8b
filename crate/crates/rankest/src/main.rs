fn main() {
    std::process::exit(rankest::cli::run(std::env::args_os()));
}
