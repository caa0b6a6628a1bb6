fn main() {
    std::process::exit(simtrans::cli::run(std::env::args_os()));
}
