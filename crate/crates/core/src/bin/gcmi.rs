fn main() {
    std::process::exit(gcmi::cli::run(std::env::args_os()));
}
