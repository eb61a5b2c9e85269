fn main() {
    std::process::exit(stepcast_cli::dispatch(std::env::args_os()));
}
