fn main() {
    std::process::exit(raogeo::cli::main_entry());
}
