fn main() {
    std::process::exit(dirac_floquet::cli::main_with(std::env::args_os()));
}
