fn main() {
    std::process::exit(tecoord_cli::main_with_args(std::env::args_os()));
}
