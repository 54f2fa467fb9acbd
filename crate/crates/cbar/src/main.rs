fn main() {
    std::process::exit(cbar::cli::main());
}
