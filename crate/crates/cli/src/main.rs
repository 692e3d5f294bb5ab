fn main() {
    std::process::exit(sketchaaa_cli::run(std::env::args_os()));
}
