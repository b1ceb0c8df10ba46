fn main() {
    std::process::exit(lrcforge::cli::main());
}
