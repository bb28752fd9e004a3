fn main() {
    std::process::exit(qpump_cli::run(std::env::args_os()));
}
