fn main() {
    std::process::exit(nullkit::cli::main_with_args(std::env::args_os()));
}
