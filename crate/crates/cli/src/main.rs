use clap::Parser;
use hle_lab::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(_) => {}
        Err(e) => {
            eprintln!("hle-lab: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
