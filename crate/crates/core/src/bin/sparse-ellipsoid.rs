fn main() {
    std::process::exit(sparse_ellipsoid::cli::run(std::env::args_os()));
}
