fn main() {
    std::process::exit(qmqkd::cli::main());
}
