fn main() {
    std::process::exit(trihex::cli::main_with_args(std::env::args_os()));
}
