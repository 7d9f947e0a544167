fn main() {
    std::process::exit(otfs_lab::run_cli(std::env::args_os()));
}
