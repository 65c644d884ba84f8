fn main() {
    std::process::exit(volheat_cli::run(std::env::args_os()));
}
