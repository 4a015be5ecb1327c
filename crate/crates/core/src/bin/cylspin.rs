fn main() {
    std::process::exit(cylspin::cli_io::run(std::env::args_os()));
}
