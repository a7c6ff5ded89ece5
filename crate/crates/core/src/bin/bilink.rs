fn main() {
    std::process::exit(bilink::cli::run(std::env::args_os()));
}
