fn main() -> std::process::ExitCode {
    nucmorph::cli::main()
}
