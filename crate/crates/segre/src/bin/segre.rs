fn main() {
    std::process::exit(segre::cli::run(std::env::args_os()));
}
