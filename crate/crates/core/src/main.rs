fn main() {
    std::process::exit(hosi::cli::main());
}
