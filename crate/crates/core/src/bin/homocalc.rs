fn main() {
    std::process::exit(homocalc::cli::main_with_args(std::env::args_os()));
}
