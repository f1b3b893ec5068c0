use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let threads = std::env::var("PABI_THREADS").ok();
    if let Err(e) = pabi_cli::configure_threads(threads.as_deref()) {
        eprint!("{}", pabi_cli::error_text(&e));
        return ExitCode::from(e.exit_code() as u8);
    }
    let outcome = pabi_cli::dispatch(std::env::args_os().skip(1));
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.code as u8)
}
