fn main() {
    std::process::exit(collapse_lab::cli::main_entry());
}
