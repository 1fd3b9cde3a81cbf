//! Command-line driver: data generation, λ selection runs, timing sweeps
//! and SVG charts.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
pub mod plot;

use std::fs::File;
use std::io::Write;

use args::{Cli, Command, PlotArgs};
use error::{CliError, CliResult};

pub fn plot(args: &PlotArgs) -> CliResult<()> {
    let file = File::open(&args.data).map_err(|e| CliError::Io(format!("cannot open {}: {e}", args.data.display())))?;
    let chart = plot::chart_from_csv(file, args.title.as_deref().unwrap_or(""))?;
    let mut out = output::sink(args.out.as_deref())?;
    out.write_all(plot::render_svg(&chart).as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Io(e.to_string()))
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Run(a) => commands::run(a),
        Command::Bench(a) => commands::bench(a),
        Command::Plot(a) => plot(a),
    }
}
