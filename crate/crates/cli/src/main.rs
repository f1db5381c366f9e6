use std::process::ExitCode;

fn main() -> ExitCode {
    if let Err(msg) =
        edgecraft_cli::apply_thread_limit(std::env::var("EDGECRAFT_THREADS").ok().as_deref())
    {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let argv: Vec<std::ffi::OsString> = std::env::args_os().collect();
    ExitCode::from(edgecraft_cli::run_command(&argv) as u8)
}
