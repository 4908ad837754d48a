fn main() -> std::process::ExitCode {
    bergman_lab::cli::main()
}
