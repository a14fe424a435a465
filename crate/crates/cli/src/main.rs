fn main() {
    std::process::exit(boxdeconv_cli::cli::main_with_args(std::env::args_os()));
}
