use clap::error::ErrorKind;
use clap::Parser;
use slforge::cli::{run, Cli, CliError};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            eprint!("{e}");
            println!("{}", CliError::Usage(e.to_string()).to_json());
            std::process::exit(1);
        }
    };
    match run(cli) {
        Ok(report) => {
            println!("{}", report.to_json());
            std::process::exit(report.exit_code());
        }
        Err(e) => {
            eprintln!("error: {e}");
            println!("{}", e.to_json());
            std::process::exit(1);
        }
    }
}
