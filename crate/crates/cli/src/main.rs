mod args;
mod config;
mod parse;
mod run;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match execute(cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: args::Cli) -> anyhow::Result<run::Status> {
    let print = cli.global.print_config;
    let config = config::parse_config(cli)?;
    if print {
        print!("{}", config.to_toml()?);
        return Ok(run::Status::Success);
    }
    if let Some(n) = config.threads {
        set_threads(n)?;
    }
    run::run(&config)
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) -> anyhow::Result<()> {
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn set_threads(_: usize) -> anyhow::Result<()> {
    Ok(())
}
