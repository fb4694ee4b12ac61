fn main() {
    std::process::exit(esc_sat::cli::run(std::env::args_os()));
}
