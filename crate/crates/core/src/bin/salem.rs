fn main() {
    std::process::exit(salem_core::cli::main_with_args(std::env::args_os()));
}
