fn main() {
    std::process::exit(ordvote::cli::main_with_args(std::env::args_os()));
}
