fn main() {
    std::process::exit(facefuse_cli::run(std::env::args_os()));
}
