fn main() {
    std::process::exit(wavefront::cli::run_cli(std::env::args_os()));
}
