fn main() {
    std::process::exit(roofseg_cli::run(std::env::args_os()));
}
