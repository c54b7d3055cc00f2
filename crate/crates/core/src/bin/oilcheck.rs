fn main() {
    std::process::exit(oilcheck::cli::main_with_args(std::env::args_os()));
}
