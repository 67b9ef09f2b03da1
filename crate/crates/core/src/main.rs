fn main() {
    std::process::exit(wnnlab::cli::run(std::env::args_os()));
}
