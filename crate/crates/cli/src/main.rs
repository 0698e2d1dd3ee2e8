fn main() {
    std::process::exit(stegdist_cli::run(std::env::args_os()));
}
