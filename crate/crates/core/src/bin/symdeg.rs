fn main() {
    std::process::exit(symdeg::cli::main_with_args(std::env::args_os()));
}
