use clap::Parser;
use fsmat_cli::{execute, Args, RunConfig};

fn main() {
    let config = match RunConfig::from_args(Args::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("fsmat: {e}");
            std::process::exit(e.exit_code());
        }
    };
    std::process::exit(execute(&config));
}
