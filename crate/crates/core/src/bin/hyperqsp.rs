fn main() {
    std::process::exit(hyperqsp::cli::main());
}
