fn main() {
    std::process::exit(pbs_ofa_cli::run(std::env::args_os()));
}
