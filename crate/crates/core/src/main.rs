fn main() {
    std::process::exit(squid_gate::cli::dispatch(std::env::args_os()));
}
