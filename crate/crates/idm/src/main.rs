fn main() {
    std::process::exit(idm::cli::cli_main(std::env::args_os()));
}
