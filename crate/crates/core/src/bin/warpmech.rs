fn main() {
    std::process::exit(warpmech::cli::run(std::env::args_os()));
}
