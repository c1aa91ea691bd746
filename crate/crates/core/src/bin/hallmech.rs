fn main() {
    std::process::exit(hallmech::expcli::run(std::env::args_os()));
}
