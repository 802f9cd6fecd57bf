fn main() {
    std::process::exit(sirpf::cli::run(std::env::args_os()));
}
