fn main() {
    std::process::exit(demilin::cli::main_with_args(std::env::args_os()));
}
