fn main() {
    std::process::exit(curvnet_cli::run(std::env::args_os()));
}
