fn main() {
    std::process::exit(paucity_cli::run(std::env::args_os()));
}
