fn main() -> std::process::ExitCode {
    forkcore::cli::main()
}
