fn main() {
    std::process::exit(pulsefit::harness::cli::main_with_args(std::env::args_os()));
}
