use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("KCC_LOG", "warn")).init();
    kcc_cli::main_entry()
}
