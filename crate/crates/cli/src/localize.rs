//! `localize` and `sweep`: momentum distributions after repeated kicks.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, ValueEnum};
use serde::Serialize;

use sawtooth::analysis::{asymmetry, fit_localization_length, peak_height, second_moment};
use sawtooth::exact::exact_evolve;
use sawtooth::noise::{device_at, noisy_localization_run, NoisyRun, RunOptions, SweepAxis};
use sawtooth::seed::derive;
use sawtooth::{Error, MapParams, MomentumDistribution};

use crate::config::{
    resolve_device, usage, ConfigFile, Format, MapArgs, Mode, OutputArgs, ResolvedDevice, SCHEMA_VERSION,
};
use crate::output::{fixed, Staged};

#[derive(Debug, Clone, Args)]
pub struct LocalizeArgs {
    /// JSON experiment config; explicit flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub map: MapArgs,
    /// Initial momentum
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub m0: i64,
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = Mode::Noiseless)]
    pub mode: Mode,
    /// Device file or name (required for noisy mode)
    #[arg(long)]
    pub device: Option<String>,
    #[arg(long, default_value_t = 8192)]
    pub shots: u64,
    #[arg(long, default_value_t = 10)]
    pub reps: u64,
    #[arg(long, default_value_t = 2021)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct LocalizeConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    config_file: Option<PathBuf>,
    params: MapParams,
    m0: i64,
    steps: usize,
    mode: Mode,
    device: Option<ResolvedDevice>,
    shots: Option<u64>,
    repetitions: Option<u64>,
    seed: Option<u64>,
    format: Format,
}

#[derive(Debug, Serialize)]
struct StepOut {
    t: usize,
    distribution: MomentumDistribution,
    #[serde(skip_serializing_if = "Option::is_none")]
    stderr: Option<Vec<f64>>,
    peak: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    peak_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_peak: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    visible: Option<bool>,
}

#[derive(Debug, Serialize)]
struct AnalysisOut {
    peak: f64,
    ell: Option<f64>,
    residual: Option<f64>,
    asymmetry: f64,
    /// Second moment about `m0` at every recorded step.
    msd: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct Routing {
    placement: Vec<usize>,
    swaps_per_step: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct LocalizeReport {
    schema_version: u32,
    command: &'static str,
    config: LocalizeConfig,
    per_step: Vec<StepOut>,
    analysis: AnalysisOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    routing: Option<Routing>,
}

fn check_counts(shots: u64, reps: u64) -> anyhow::Result<()> {
    if shots == 0 {
        return Err(usage("--shots must be at least 1"));
    }
    if reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    Ok(())
}

fn check_m0(params: &MapParams, m0: i64) -> anyhow::Result<()> {
    let half = params.half_dim();
    if m0 < -half || m0 >= half {
        return Err(usage(format!("--m0 {m0} outside [{}, {})", -half, half)));
    }
    Ok(())
}

fn analysis_of(per_step: &[StepOut], m0: i64) -> anyhow::Result<AnalysisOut> {
    let last = &per_step.last().expect("at least the initial step").distribution;
    let fit = match fit_localization_length(last, m0) {
        Ok(f) => Some(f),
        Err(Error::FitUndefined(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(AnalysisOut {
        peak: peak_height(last, m0)?,
        ell: fit.map(|f| f.ell),
        residual: fit.map(|f| f.residual),
        asymmetry: asymmetry(last, m0)?,
        msd: per_step
            .iter()
            .map(|s| second_moment(&s.distribution, m0))
            .collect::<sawtooth::Result<_>>()?,
    })
}

fn noisy_steps(run: &NoisyRun) -> Vec<StepOut> {
    run.per_step
        .iter()
        .map(|s| StepOut {
            t: s.t,
            distribution: s.distribution.clone(),
            stderr: Some(s.stderr.clone()),
            peak: s.peak,
            peak_stderr: Some(s.peak_stderr),
            expected_peak: Some(s.expected.weight(run.m0).expect("m0 checked")),
            visible: Some(s.visible),
        })
        .collect()
}

fn take<T>(slot: &mut T, value: Option<T>, on_command_line: bool) {
    if let (Some(v), false) = (value, on_command_line) {
        *slot = v;
    }
}

/// Fill in values from `--config` wherever the flag was not typed explicitly.
pub fn apply_config(args: &mut LocalizeArgs, matches: &ArgMatches) -> anyhow::Result<()> {
    let Some(path) = &args.config else { return Ok(()) };
    let file = ConfigFile::load(path)?;
    let given = |id: &str| matches.value_source(id) == Some(ValueSource::CommandLine);

    take(&mut args.map.n, file.n, given("n"));
    // The command line picks the parameterization as a whole.
    if !["L", "K", "k", "T"].iter().any(|id| given(id)) {
        let explicit = file.k.is_some() || file.period.is_some();
        if explicit && (file.l.is_some() || file.chaos.is_some()) {
            return Err(usage(format!("{}: give either L/K or k/T, not both", path.display())));
        }
        args.map.l = file.l;
        args.map.chaos = file.chaos;
        args.map.kick = file.k;
        args.map.period = file.period;
        if explicit && (file.k.is_none() || file.period.is_none()) {
            return Err(usage(format!("{}: k and T go together", path.display())));
        }
    }
    take(&mut args.m0, file.m0, given("m0"));
    take(&mut args.steps, file.steps, given("steps"));
    take(&mut args.mode, file.mode, given("mode"));
    take(&mut args.device, file.device.map(Some), given("device"));
    take(&mut args.shots, file.shots, given("shots"));
    take(&mut args.reps, file.repetitions, given("reps"));
    take(&mut args.seed, file.seed, given("seed"));
    take(&mut args.output.out, file.out.map(Some), given("out"));
    take(&mut args.output.format, file.format, given("format"));
    Ok(())
}

pub fn header(p: &MapParams) -> String {
    let l = p.l.map(|l| format!(" L={l}")).unwrap_or_default();
    format!("n={}{l} K={} k={} T={}", p.n, p.chaos, fixed(p.k), fixed(p.period))
}

pub fn localize(args: &LocalizeArgs) -> anyhow::Result<()> {
    let params = args.map.resolve()?;
    check_m0(&params, args.m0)?;
    let noisy = args.mode == Mode::Noisy;
    if noisy && args.device.is_none() {
        return Err(usage("noisy mode requires --device"));
    }
    if noisy {
        check_counts(args.shots, args.reps)?;
    }
    let device = args.device.as_deref().map(resolve_device).transpose()?;

    let (per_step, routing) = if let (true, Some(dev)) = (noisy, &device) {
        let opts = RunOptions {
            m0: args.m0,
            steps: args.steps,
            shots: args.shots,
            repetitions: args.reps,
            seed: args.seed,
        };
        let run = noisy_localization_run(&params, &dev.model, &opts)?;
        let routing = Routing {
            placement: run.placement.clone(),
            swaps_per_step: run.swaps_per_step.clone(),
        };
        (noisy_steps(&run), Some(routing))
    } else {
        let steps = exact_evolve(&params, args.m0, args.steps)?
            .into_iter()
            .enumerate()
            .map(|(t, d)| StepOut {
                t,
                peak: d.weight(args.m0).expect("m0 checked"),
                distribution: d,
                stderr: None,
                peak_stderr: None,
                expected_peak: None,
                visible: None,
            })
            .collect();
        (steps, None)
    };

    let analysis = analysis_of(&per_step, args.m0)?;
    let report = LocalizeReport {
        schema_version: SCHEMA_VERSION,
        command: "localize",
        config: LocalizeConfig {
            config_file: args.config.clone(),
            params,
            m0: args.m0,
            steps: args.steps,
            mode: args.mode,
            device: if noisy { device } else { None },
            shots: noisy.then_some(args.shots),
            repetitions: noisy.then_some(args.reps),
            seed: noisy.then_some(args.seed),
            format: args.output.format,
        },
        per_step,
        analysis,
        routing,
    };

    let mut table = format!(
        "{} m0={} mode={}\n",
        header(&params),
        args.m0,
        if noisy { "noisy" } else { "noiseless" }
    );
    if noisy {
        table.push_str("t\tpeak\tstderr\texpected\tvisible\n");
    } else {
        table.push_str("t\tpeak\n");
    }
    for s in &report.per_step {
        match (s.peak_stderr, s.expected_peak, s.visible) {
            (Some(e), Some(x), Some(v)) => writeln!(
                table,
                "{}\t{}\t{}\t{}\t{}",
                s.t,
                fixed(s.peak),
                fixed(e),
                fixed(x),
                if v { "yes" } else { "no" }
            )?,
            _ => writeln!(table, "{}\t{}", s.t, fixed(s.peak))?,
        }
    }

    let mut staged = Staged::default();
    if args.output.format == Format::Csv {
        staged.add("distributions.csv", distributions_csv(&report.per_step));
        staged.add("peaks.csv", peaks_csv(&report.per_step));
    }
    staged.add_json("run.json", &report)?;
    finish(table, staged, args.output.out.as_ref())
}

fn distributions_csv(steps: &[StepOut]) -> String {
    let mut s = String::from("t,m,W,stderr\n");
    for st in steps {
        for (i, (m, w)) in st.distribution.iter().enumerate() {
            let e = st.stderr.as_ref().map(|e| e[i]).unwrap_or(0.0);
            s.push_str(&format!("{},{m},{w},{e}\n", st.t));
        }
    }
    s
}

fn peaks_csv(steps: &[StepOut]) -> String {
    let noisy = steps.first().is_some_and(|s| s.visible.is_some());
    let mut s = String::from(if noisy {
        "t,peak,stderr,expected,visible\n"
    } else {
        "t,peak\n"
    });
    for st in steps {
        match (st.peak_stderr, st.expected_peak, st.visible) {
            (Some(e), Some(x), Some(v)) => s.push_str(&format!("{},{},{e},{x},{v}\n", st.t, st.peak)),
            _ => s.push_str(&format!("{},{}\n", st.t, st.peak)),
        }
    }
    s
}

/// Prints the table, then writes staged files when an output directory is set.
pub fn finish(table: String, staged: Staged, out: Option<&PathBuf>) -> anyhow::Result<()> {
    if let Some(dir) = out {
        let written = staged.commit(dir)?;
        print!("{table}");
        for p in written {
            println!("wrote {}", p.display());
        }
    } else {
        print!("{table}");
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Axis {
    #[value(name = "err_2q")]
    #[serde(rename = "err_2q")]
    Err2q,
    #[value(name = "err_1q")]
    #[serde(rename = "err_1q")]
    Err1q,
    #[value(name = "t1t2-scale")]
    #[serde(rename = "t1t2-scale")]
    T1t2Scale,
    #[value(name = "steps")]
    #[serde(rename = "steps")]
    Steps,
}

impl Axis {
    fn to_core(self) -> SweepAxis {
        match self {
            Axis::Err2q => SweepAxis::Err2q,
            Axis::Err1q => SweepAxis::Err1q,
            Axis::T1t2Scale => SweepAxis::T1t2Scale,
            Axis::Steps => SweepAxis::Steps,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Axis::Err2q => "err_2q",
            Axis::Err1q => "err_1q",
            Axis::T1t2Scale => "t1t2-scale",
            Axis::Steps => "steps",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Comma-separated grid values
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    /// Device file or name
    #[arg(long)]
    pub device: String,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub m0: i64,
    /// Steps per point (ignored on the steps axis)
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    #[arg(long, default_value_t = 8192)]
    pub shots: u64,
    #[arg(long, default_value_t = 10)]
    pub reps: u64,
    #[arg(long, default_value_t = 2021)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct SweepConfig {
    params: MapParams,
    axis: Axis,
    values: Vec<f64>,
    device: ResolvedDevice,
    m0: i64,
    steps: Option<usize>,
    shots: u64,
    repetitions: u64,
    seed: u64,
    format: Format,
}

#[derive(Debug, Serialize)]
struct SweepPoint {
    value: f64,
    steps: usize,
    seed: u64,
    peak: f64,
    stderr: f64,
    expected: f64,
    visible: bool,
}

#[derive(Debug, Serialize)]
struct SweepReport {
    schema_version: u32,
    command: &'static str,
    config: SweepConfig,
    points: Vec<SweepPoint>,
}

pub fn sweep(args: &SweepArgs) -> anyhow::Result<()> {
    let params = args.map.resolve()?;
    check_m0(&params, args.m0)?;
    check_counts(args.shots, args.reps)?;
    let device = resolve_device(&args.device)?;
    let mut points = Vec::with_capacity(args.values.len());
    for (i, &value) in args.values.iter().enumerate() {
        let steps = if args.axis == Axis::Steps {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(usage(format!("steps axis needs positive integers, got {value}")));
            }
            value as usize
        } else {
            args.steps
        };
        let dev = device_at(&device.model, args.axis.to_core(), value).map_err(|e| usage(e.to_string()))?;
        let seed = derive(args.seed, i as u64);
        let opts = RunOptions {
            m0: args.m0,
            steps,
            shots: args.shots,
            repetitions: args.reps,
            seed,
        };
        let run = noisy_localization_run(&params, &dev, &opts)?;
        let last = run.per_step.last().expect("initial step recorded");
        points.push(SweepPoint {
            value,
            steps,
            seed,
            peak: last.peak,
            stderr: last.peak_stderr,
            expected: last.expected.weight(args.m0)?,
            visible: last.visible,
        });
    }

    let mut table = format!(
        "{} m0={} device={} axis={}\n",
        header(&params),
        args.m0,
        device.model.name,
        args.axis.name()
    );
    table.push_str("value\tsteps\tpeak\tstderr\texpected\tvisible\n");
    let mut csv = String::from("axis,value,steps,peak,stderr,expected,visible\n");
    for p in &points {
        writeln!(
            table,
            "{}\t{}\t{}\t{}\t{}\t{}",
            p.value,
            p.steps,
            fixed(p.peak),
            fixed(p.stderr),
            fixed(p.expected),
            if p.visible { "yes" } else { "no" }
        )?;
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            args.axis.name(),
            p.value,
            p.steps,
            p.peak,
            p.stderr,
            p.expected,
            p.visible
        )?;
    }
    let report = SweepReport {
        schema_version: SCHEMA_VERSION,
        command: "sweep",
        config: SweepConfig {
            params,
            axis: args.axis,
            values: args.values.clone(),
            device,
            m0: args.m0,
            steps: (args.axis != Axis::Steps).then_some(args.steps),
            shots: args.shots,
            repetitions: args.reps,
            seed: args.seed,
            format: args.output.format,
        },
        points,
    };
    let mut staged = Staged::default();
    if args.output.format == Format::Csv {
        staged.add("sweep.csv", csv);
    }
    staged.add_json("sweep.json", &report)?;
    finish(table, staged, args.output.out.as_ref())
}
