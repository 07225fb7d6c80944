fn main() {
    std::process::exit(sockp_toolkit::cli::run(std::env::args_os()));
}
