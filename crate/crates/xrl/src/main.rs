fn main() {
    std::process::exit(xrl::cli::run(std::env::args_os()));
}
