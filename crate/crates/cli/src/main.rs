fn main() {
    std::process::exit(normflate_cli::run(std::env::args_os()));
}
