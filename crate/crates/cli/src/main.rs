use clap::Parser;
use shiftcert_cli::{run, Cli};

fn main() {
    match run(Cli::parse()) {
        Ok(o) => {
            println!("{}", o.summary);
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            std::process::exit(o.exit_code);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
