fn main() {
    std::process::exit(paracalc::cli::main_entry());
}
