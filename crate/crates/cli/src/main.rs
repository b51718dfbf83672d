fn main() {
    std::process::exit(mattolab_cli::app::main_with_args(std::env::args_os()));
}
