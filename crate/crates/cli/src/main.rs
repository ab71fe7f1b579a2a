fn main() {
    let code = nlfm_cli::run(std::env::args_os(), std::env::var_os(nlfm_cli::OUT_DIR_ENV));
    std::process::exit(code);
}
