fn main() {
    std::process::exit(ucl_core::cli::run(std::env::args_os()));
}
