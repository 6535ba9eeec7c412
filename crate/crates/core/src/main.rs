fn main() {
    std::process::exit(mutafuzz::cli::main());
}
