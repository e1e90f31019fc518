fn main() -> std::process::ExitCode {
    wildclass::cli::main()
}
