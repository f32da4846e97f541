fn main() {
    std::process::exit(dpal::cli::main_with_args(std::env::args_os()));
}
