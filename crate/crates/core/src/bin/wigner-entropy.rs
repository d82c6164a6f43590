fn main() {
    std::process::exit(wigner_entropy::cli::main());
}
