fn main() {
    std::process::exit(cachecast_cli::main_with_args(std::env::args_os()));
}
