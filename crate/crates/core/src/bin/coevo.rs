fn main() {
    std::process::exit(coevo_games::cli::run(std::env::args_os()));
}
