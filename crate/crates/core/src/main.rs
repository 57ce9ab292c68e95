fn main() {
    std::process::exit(tippingscope::cli::dispatch(std::env::args_os()));
}
