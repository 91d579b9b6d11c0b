fn main() {
    std::process::exit(jacobi_flow::cli::run(std::env::args_os()));
}
