fn main() {
    std::process::exit(dyadic_cubes::cli::run());
}
