fn main() -> std::process::ExitCode {
    dressed_cascade::cli::main()
}
