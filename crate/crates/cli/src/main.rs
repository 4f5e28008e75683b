fn main() -> std::process::ExitCode {
    cdma_sim::main_with(std::env::args_os())
}
