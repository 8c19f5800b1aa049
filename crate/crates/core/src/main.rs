fn main() {
    std::process::exit(robust_se3::cli::main_with_args(std::env::args_os()));
}
