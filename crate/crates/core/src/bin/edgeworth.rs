fn main() {
    std::process::exit(edgeworth::cli::main_with_args(std::env::args_os()));
}
