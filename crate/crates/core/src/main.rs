fn main() -> std::process::ExitCode {
    pidtune::cli::main()
}
