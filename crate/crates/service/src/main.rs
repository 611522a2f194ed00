fn main() -> std::process::ExitCode {
    promodel_service::cli::main(std::env::args_os())
}
