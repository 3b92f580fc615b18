fn main() {
    std::process::exit(effortnet_cli::run(std::env::args_os()));
}
