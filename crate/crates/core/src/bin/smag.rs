fn main() {
    std::process::exit(smag_core::cli::main_with(std::env::args_os()));
}
