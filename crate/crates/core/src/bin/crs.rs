fn main() {
    std::process::exit(crs::cli::run(std::env::args_os()));
}
