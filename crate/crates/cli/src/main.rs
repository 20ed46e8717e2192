fn main() {
    std::process::exit(stringinv::cli::run(std::env::args_os()));
}
