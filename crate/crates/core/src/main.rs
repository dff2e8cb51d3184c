fn main() {
    std::process::exit(dsy::cli::main_with(std::env::args_os()));
}
