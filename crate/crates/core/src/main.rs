fn main() {
    std::process::exit(arrow_sysid::cli::main_with_args(std::env::args_os()));
}
