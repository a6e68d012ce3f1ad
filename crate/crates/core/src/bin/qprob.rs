fn main() {
    std::process::exit(qprob::cli::run(std::env::args_os()));
}
