fn main() -> std::process::ExitCode {
    multilayer_power::cli::main()
}
