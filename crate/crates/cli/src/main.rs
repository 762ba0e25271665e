fn main() {
    std::process::exit(brightcv_cli::run(std::env::args_os()));
}
