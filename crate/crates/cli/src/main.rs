mod args;
mod commands;
mod output;
mod provider;

use std::process::ExitCode;
use std::time::Duration;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::ProviderFailure;
use provider::ProviderHandle;

const EXIT_USAGE: u8 = 1;
const EXIT_PROVIDER: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let provider = e.chain().any(|c| {
        c.is::<ProviderFailure>()
            || c.is::<eidoku_core::ProviderError>()
            || matches!(
                c.downcast_ref::<eidoku_core::Error>(),
                Some(eidoku_core::Error::Provider(_))
            )
    });
    if provider {
        EXIT_PROVIDER
    } else {
        EXIT_USAGE
    }
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()?;
    }
    let needs_provider = !matches!(cli.command, Command::Defaults | Command::ProviderStdio);
    let (handle, spec) = if needs_provider {
        let (h, s) = ProviderHandle::from_env(Duration::from_millis(cli.provider_timeout_ms))?;
        (Some(h), s.to_string())
    } else {
        (None, String::new())
    };
    let providers = || handle.as_ref().expect("provider loaded");

    match &cli.command {
        Command::GenRgd(a) => commands::gen_rgd(a, providers(), &spec),
        Command::Verify(a) => commands::verify(a, providers(), &spec),
        Command::Bench(a) => commands::bench(a, providers(), &spec),
        Command::Sweep(a) => commands::sweep(a, providers(), &spec),
        Command::Correlate(a) => commands::correlate(a, providers(), &spec),
        Command::Defaults => commands::defaults(),
        Command::ProviderStdio => commands::provider_stdio(),
    }
}
