fn main() {
    std::process::exit(sublinear_lab::cli::execute(std::env::args_os()));
}
