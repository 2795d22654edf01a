fn main() {
    std::process::exit(fpr::harness::cli_dispatch(std::env::args_os()));
}
