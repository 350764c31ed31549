fn main() {
    std::process::exit(fermikit_cli::main_with_args(std::env::args_os()));
}
