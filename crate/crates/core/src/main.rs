fn main() {
    std::process::exit(pathqnn::cli::main_with_args(std::env::args_os()));
}
