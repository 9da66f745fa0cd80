fn main() {
    std::process::exit(tiltlab::cli::main_with_args(std::env::args_os()));
}
