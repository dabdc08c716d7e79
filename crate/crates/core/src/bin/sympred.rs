fn main() {
    std::process::exit(sympred::cli::main_with_args(std::env::args_os()));
}
