//! `diffusion`: classical ensemble second moment and fitted D.

use clap::Args;
use serde::Serialize;

use sawtooth::classical::{diffusion_experiment, DiffusionSummary};
use sawtooth::MapParams;

use crate::config::{usage, Format, MapArgs, OutputArgs, SCHEMA_VERSION};
use crate::localize::{finish, header};
use crate::output::Staged;

#[derive(Debug, Clone, Args)]
pub struct DiffusionArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Initial momentum
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub m0: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long, default_value_t = 2021)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct DiffusionConfig {
    params: MapParams,
    m0: f64,
    trajectories: usize,
    steps: usize,
    seed: u64,
    format: Format,
}

#[derive(Debug, Serialize)]
struct SummaryReport<'a> {
    schema_version: u32,
    command: &'static str,
    config: DiffusionConfig,
    #[serde(flatten)]
    summary: DiffusionSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    msd: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stderr: Option<&'a [f64]>,
}

pub fn diffusion(args: &DiffusionArgs) -> anyhow::Result<()> {
    let params = args.map.resolve()?;
    let run = diffusion_experiment(&params, args.m0, args.trajectories, args.steps, args.seed)
        .map_err(|e| usage(e.to_string()))?;
    let ratio = run
        .ratio
        .map(|r| format!("{r:.4}"))
        .unwrap_or_else(|| "undefined".into());
    let table = format!(
        "{} m0={} trajectories={} steps={}\nD_fit={:.6} D_quasilinear={:.6} ratio={ratio}\n",
        header(&params),
        args.m0,
        args.trajectories,
        args.steps,
        run.d_fit,
        run.d_quasilinear,
    );
    let json = args.output.format == Format::Json;
    let report = SummaryReport {
        schema_version: SCHEMA_VERSION,
        command: "diffusion",
        config: DiffusionConfig {
            params,
            m0: args.m0,
            trajectories: args.trajectories,
            steps: args.steps,
            seed: args.seed,
            format: args.output.format,
        },
        summary: run.summary(),
        msd: json.then_some(run.msd.as_slice()),
        stderr: json.then_some(run.stderr.as_slice()),
    };
    let mut staged = Staged::default();
    if json {
        staged.add_json("diffusion.json", &report)?;
    } else {
        staged.add("diffusion.csv", run.to_csv());
        staged.add_json("summary.json", &report)?;
    }
    finish(table, staged, args.output.out.as_ref())
}
