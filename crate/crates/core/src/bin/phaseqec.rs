fn main() -> std::process::ExitCode {
    phaseqec::cli::main_with_args(std::env::args_os())
}
