fn main() {
    std::process::exit(harvol::cli::run(std::env::args_os()));
}
