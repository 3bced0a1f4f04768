fn main() {
    std::process::exit(bmv_lab_cli::run_cli(std::env::args_os()));
}
