fn main() {
    std::process::exit(refusal_index::cli::run(std::env::args_os()));
}
