fn main() {
    std::process::exit(gamma_dde::cli::run(std::env::args_os()));
}
