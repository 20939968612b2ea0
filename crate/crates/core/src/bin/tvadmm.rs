fn main() {
    std::process::exit(tvadmm::cli::run(std::env::args_os()));
}
