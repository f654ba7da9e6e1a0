fn main() {
    std::process::exit(externet::cli::main_with_args(std::env::args_os()));
}
