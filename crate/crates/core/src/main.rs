fn main() {
    std::process::exit(qmarg::cli::main_entry());
}
