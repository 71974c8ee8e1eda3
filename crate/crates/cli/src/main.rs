use clap::Parser;
use tfim_rfs_cli::{run, Args};

fn main() {
    let args = Args::parse();
    if let Err(err) = run(&args) {
        eprintln!("tfim-rfs: {err}");
        std::process::exit(err.exit_code());
    }
}
