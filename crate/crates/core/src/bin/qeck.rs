fn main() {
    env_logger::init();
    std::process::exit(qeck::cli::main());
}
