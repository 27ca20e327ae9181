fn main() {
    let code = trimlab::cli::run(std::env::args().skip(1));
    std::process::exit(code);
}
