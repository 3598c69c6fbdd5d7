fn main() -> std::process::ExitCode {
    quest::cli::run()
}
