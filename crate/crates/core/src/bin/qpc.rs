fn main() {
    std::process::exit(qpc::cli::main_with_args(std::env::args_os()));
}
