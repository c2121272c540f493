fn main() {
    std::process::exit(peabody::cli::run(std::env::args_os()));
}
