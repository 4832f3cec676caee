fn main() {
    std::process::exit(birkhoff_lab::cli::run(std::env::args_os()));
}
