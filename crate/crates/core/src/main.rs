fn main() {
    std::process::exit(taxis_hopf::cli::dispatch(std::env::args_os()));
}
