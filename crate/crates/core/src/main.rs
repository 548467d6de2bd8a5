fn main() {
    std::process::exit(iarx::cli::main());
}
