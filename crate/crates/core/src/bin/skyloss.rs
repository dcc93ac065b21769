fn main() {
    std::process::exit(skyloss::cli::main_with_args(std::env::args_os()));
}
