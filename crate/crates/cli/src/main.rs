use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::Parser;
use kvloc_core::runner::{ScenarioSource, Status};
use kvloc_core::scenarios::catalog;
use kvloc_core::{run, RunSpec, Suite};

/// Numerical verification of localization identities for pairs of Killing fields.
#[derive(Debug, Parser)]
#[command(name = "kvloc", version)]
struct Args {
    /// Built-in scenario name or path to a JSON scenario file.
    #[arg(long, required_unless_present = "list_scenarios")]
    scenario: Option<String>,

    /// lemmas | theorem1 | theorem2 | theorem3 | theorem4 | sweep-s | decay | all
    #[arg(long, default_value = "all")]
    suite: String,

    /// Deformation parameters, comma separated.
    #[arg(long = "s", value_delimiter = ',')]
    s_grid: Option<Vec<f64>>,

    /// Field speed; sets the scenario's t (or t1 and t2).
    #[arg(long)]
    t: Option<f64>,

    /// Relative tolerance for integral identities.
    #[arg(long)]
    tol: Option<f64>,

    /// Base quadrature nodes: one count, or one per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<usize>>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override a scenario parameter, e.g. --param c=0.5 (repeatable).
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,

    #[arg(long)]
    list_scenarios: bool,
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("parameter {k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let args = Args::parse();
    if args.list_scenarios {
        for (name, about) in catalog() {
            println!("{name:<26} {about}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let scenario = args.scenario.ok_or_else(|| anyhow!("--scenario is required"))?;
    let suite: Suite = args.suite.parse().map_err(|e| anyhow!("{e}"))?;
    let spec = RunSpec {
        scenario: ScenarioSource::parse(&scenario),
        suite,
        s_grid: args.s_grid,
        t: args.t,
        params: args.params.into_iter().collect::<BTreeMap<_, _>>(),
        tol: args.tol,
        nodes: args.nodes,
        seed: args.seed,
        out: args.out.clone(),
    };
    let report = run(&spec);
    if args.out.is_none() {
        println!("{}", report.to_json());
    }
    for c in &report.checks {
        let status = match c.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Skipped => "skip",
        };
        let residual = c.residual.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "-".into());
        let tol = c.tolerance.map(|r| format!("{r:.0e}")).unwrap_or_else(|| "-".into());
        eprintln!("[{status}] {:<9} {:<52} residual {residual} (tol {tol})", c.suite, c.name);
        if c.status != Status::Pass {
            if let Some(m) = &c.message {
                eprintln!("       {m}");
            }
        }
    }
    let (p, f, s) = report.counts();
    eprintln!("{}: {p} passed, {f} failed, {s} skipped", report.scenario);
    if let Some(path) = &args.out {
        if report.passed {
            // run() already wrote it; confirm the file exists for scripting
            std::fs::metadata(path).with_context(|| format!("report {}", path.display()))?;
        }
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}
