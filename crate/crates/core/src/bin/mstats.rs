fn main() {
    std::process::exit(mstats::cli::run(std::env::args_os()));
}
