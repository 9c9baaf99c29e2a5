fn main() {
    std::process::exit(fgn_lan::cli::run(std::env::args_os()));
}
