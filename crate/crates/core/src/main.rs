fn main() {
    std::process::exit(rdft::cli::main_entry());
}
