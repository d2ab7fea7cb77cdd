fn main() {
    std::process::exit(meros_verify::cli::main_with_args(std::env::args_os()));
}
