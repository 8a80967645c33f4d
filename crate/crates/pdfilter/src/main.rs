fn main() -> std::process::ExitCode {
    pdfilter::cli::main()
}
