fn main() {
    std::process::exit(fedbandit::cli::main_with_args(std::env::args_os()));
}
