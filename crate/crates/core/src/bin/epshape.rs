fn main() {
    std::process::exit(epshape::cli::main_with_args(std::env::args_os()));
}
