fn main() {
    std::process::exit(degensl::cli::main_with_args(std::env::args_os()));
}
