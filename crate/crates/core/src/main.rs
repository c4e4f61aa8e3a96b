fn main() {
    std::process::exit(covscat::cli::run(std::env::args_os()));
}
