use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use kneading_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let report = run(&cli);
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(report.output.as_bytes());
    if report.code != 0 {
        eprintln!("kneadlab: exit {}", report.code);
    }
    ExitCode::from(report.code as u8)
}
