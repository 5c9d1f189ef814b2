fn main() {
    std::process::exit(rmt_fluct::harness::run_cli(std::env::args_os()));
}
