//! `verify`: gate circuit against the direct step unitary on random parameters.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use clap::Args;
use serde::Serialize;

use sawtooth::circuit::{
    build_step_circuit, build_step_circuit_from, circuit_unitary, uk_angles, ut_angles, MAX_DENSE_QUBITS,
};
use sawtooth::exact::exact_step_unitary;
use sawtooth::seed::derive;
use sawtooth::MapParams;

use crate::config::{usage, OutputArgs, SCHEMA_VERSION};
use crate::output::Staged;

pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    pub n_min: u32,
    #[arg(long, default_value_t = 6)]
    pub n_max: u32,
    /// Random (K, L) pairs per register size
    #[arg(long, default_value_t = 10)]
    pub trials: u32,
    #[arg(long, default_value_t = 2021)]
    pub seed: u64,
    /// Perturb one kick angle (negative control)
    #[arg(long, hide = true)]
    pub corrupt_angle: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct Trial {
    n: u32,
    #[serde(rename = "K")]
    chaos: f64,
    #[serde(rename = "L")]
    l: i64,
    distance: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    schema_version: u32,
    command: &'static str,
    n_min: u32,
    n_max: u32,
    trials: u32,
    seed: u64,
    corrupt_angle: bool,
    tolerance: f64,
    max_distance: f64,
    pass: bool,
    results: Vec<Trial>,
}

fn unit_interval(x: u64) -> f64 {
    (x >> 11) as f64 / (1u64 << 53) as f64
}

/// K uniform in [-10, 10), L uniform in [1, 2N].
pub fn trial_params(n: u32, seed: u64, trial: u32) -> (f64, i64) {
    let base = derive(derive(seed, n as u64), trial as u64);
    let chaos = 20.0 * unit_interval(derive(base, 0)) - 10.0;
    let dim = 1u64 << n;
    let l = 1 + (derive(base, 1) % (2 * dim)) as i64;
    (chaos, l)
}

pub fn distance(params: &MapParams, corrupt: bool) -> anyhow::Result<f64> {
    let circuit = if corrupt {
        let mut kick = uk_angles(params);
        kick.p[0] = (kick.p[0] + 1e-3) % TAU;
        build_step_circuit_from(params.n, &kick, &ut_angles(params))
    } else {
        build_step_circuit(params)
    };
    let a = circuit_unitary(&circuit)?;
    let b = exact_step_unitary(params)?;
    Ok(a.aligned_distance(&b))
}

pub fn verify(args: &VerifyArgs) -> anyhow::Result<bool> {
    if args.n_min < 1 || args.n_max > MAX_DENSE_QUBITS || args.n_min > args.n_max {
        return Err(usage(format!("n range must lie within [1, {MAX_DENSE_QUBITS}]")));
    }
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let mut results = Vec::new();
    let mut table = String::from("n\ttrials\tmax_distance\tstatus\n");
    for n in args.n_min..=args.n_max {
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for trial in 0..args.trials {
            let (chaos, l) = trial_params(n, args.seed, trial);
            let params = MapParams::from_chaos(n, l, chaos)?;
            let d = distance(&params, args.corrupt_angle)?;
            let pass = d < TOLERANCE;
            worst = worst.max(d);
            ok &= pass;
            results.push(Trial {
                n,
                chaos,
                l,
                distance: d,
                pass,
            });
        }
        writeln!(
            table,
            "{n}\t{}\t{worst:.3e}\t{}",
            args.trials,
            if ok { "ok" } else { "FAIL" }
        )?;
    }
    let max_distance = results.iter().map(|r| r.distance).fold(0.0, f64::max);
    let pass = results.iter().all(|r| r.pass);
    writeln!(table, "max distance {max_distance:.3e} (tolerance {TOLERANCE:e})")?;
    for r in results.iter().filter(|r| !r.pass) {
        writeln!(
            table,
            "FAIL n={} K={} L={} distance={:.3e}",
            r.n, r.chaos, r.l, r.distance
        )?;
    }
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        command: "verify",
        n_min: args.n_min,
        n_max: args.n_max,
        trials: args.trials,
        seed: args.seed,
        corrupt_angle: args.corrupt_angle,
        tolerance: TOLERANCE,
        max_distance,
        pass,
        results,
    };
    let mut staged = Staged::default();
    staged.add_json("verify.json", &report)?;
    crate::localize::finish(table, staged, args.output.out.as_ref())?;
    Ok(pass)
}
