fn main() {
    std::process::exit(karma::cli::main_with_args(std::env::args_os()));
}
