fn main() {
    std::process::exit(hypme_cli::main_with_args(std::env::args_os()));
}
