use clap::Parser;
use std::io::Write;
use tfharmonic::cli::{run, AnalysisRequest, EXIT_INPUT};

fn main() {
    let req = match AnalysisRequest::try_parse() {
        Ok(r) => r,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let out = run(&req);
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    std::process::exit(out.code);
}
