fn main() {
    std::process::exit(gtscheme::cli::run(std::env::args_os()));
}
