fn main() {
    std::process::exit(nde_shockkit::cli::run(std::env::args_os()));
}
