fn main() {
    std::process::exit(cma_lift::cli::main());
}
