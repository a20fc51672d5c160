fn main() {
    std::process::exit(gaugesplit::cli::main_with_args(std::env::args_os()));
}
