use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use kgamma_cli::args::Cli;
use kgamma_cli::report::EXIT_USAGE;
use kgamma_cli::run::run_command;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let (report, out, format) = run_command(&cli.command);
    let text = report.render(format);
    let written = match out {
        Some(path) => std::fs::write(&path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        eprintln!("kgamma: cannot write report: {msg}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    ExitCode::from(report.exit_code as u8)
}
