fn main() {
    if let Err(e) = parvi::app::main() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
