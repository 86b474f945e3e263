fn main() {
    std::process::exit(rankloss::cli::run(std::env::args_os()));
}
