fn main() {
    std::process::exit(cartan_mgs::cli::run(std::env::args_os()));
}
