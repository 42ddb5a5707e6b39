fn main() {
    std::process::exit(stfreq::cli::run(std::env::args_os()));
}
