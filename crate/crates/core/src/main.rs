fn main() {
    std::process::exit(intensity::cli::run(std::env::args_os()));
}
