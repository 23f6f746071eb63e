fn main() {
    std::process::exit(robustopt_cli::main_with_args(std::env::args_os()));
}
