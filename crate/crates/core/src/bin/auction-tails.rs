fn main() {
    std::process::exit(auction_tails::cli::main());
}
