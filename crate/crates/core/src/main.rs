fn main() {
    std::process::exit(cacer::cli::main());
}
