fn main() {
    std::process::exit(bykov_cli::main_with(std::env::args().collect()));
}
