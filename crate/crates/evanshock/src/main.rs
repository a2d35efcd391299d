fn main() {
    std::process::exit(evanshock::cli::dispatch(std::env::args_os()));
}
