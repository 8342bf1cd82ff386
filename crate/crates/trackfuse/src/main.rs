fn main() {
    std::process::exit(trackfuse::cli::main_with_args(std::env::args_os()));
}
