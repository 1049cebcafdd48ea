fn main() {
    std::process::exit(rk_error_lab::cli::main_with_args(std::env::args_os()));
}
