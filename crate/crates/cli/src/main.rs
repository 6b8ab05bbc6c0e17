use std::io::{self, Write};
use std::process;

use clap::Parser;
use lowlat_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = run(&cli, &mut out);
    out.flush().ok();
    if let Err(e) = result {
        eprintln!("error: {e}");
        process::exit(e.exit_code() as i32);
    }
}
