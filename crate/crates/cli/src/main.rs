use clap::Parser;
use hr_sieve_cli::config::load_config_file;
use hr_sieve_cli::{run, CliError, Flags, RunConfig};
use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match try_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn try_main() -> Result<bool, CliError> {
    let flags = match Flags::try_parse() {
        Ok(f) => f,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            return Err(CliError::Usage("invalid arguments".into()));
        }
        Err(e) => {
            print!("{e}");
            return Ok(true);
        }
    };
    let flags = match &flags.config {
        Some(path) => {
            let file = load_config_file(path)?;
            flags.or(file)
        }
        None => flags,
    };
    let cfg = RunConfig::from_flags(flags)?;
    let outcome = run(&cfg)?;
    outcome.document.write(cfg.format, cfg.output.as_deref())?;
    Ok(outcome.success)
}
