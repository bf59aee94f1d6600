use std::process::exit;

fn main() {
    exit(physarum::cli::run(std::env::args()));
}
