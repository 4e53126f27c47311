//! `devices` comparison table and `circuit` export.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use sawtooth::circuit::{build_step_circuit, Circuit, GateKind};
use sawtooth::device::{
    avg_decoherence, execution_time, fixtures, route_circuit, total_relative_error, RoutingObjective,
};
use sawtooth::noise::readout_layout;
use sawtooth::MapParams;

use crate::config::{
    device_dir, load_file, resolve_device, usage, Format, MapArgs, OutputArgs, ResolvedDevice, SCHEMA_VERSION,
};
use crate::localize::{finish, header};
use crate::output::{fixed, Staged};

#[derive(Debug, Clone, Args)]
pub struct DevicesArgs {
    /// Directory of device JSON files (default: the device directory
    /// variable, else the bundled set)
    #[arg(long)]
    pub dir: Option<PathBuf>,
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct DeviceRow {
    name: String,
    source: String,
    placement: Vec<usize>,
    swaps: usize,
    /// Mean min(T1, T2) over the placement, microseconds.
    t_dec_us: f64,
    e_tot: f64,
    /// Serial schedule plus readout, microseconds.
    exec_time_us: f64,
}

#[derive(Debug, Serialize)]
struct DevicesReport {
    schema_version: u32,
    command: &'static str,
    params: MapParams,
    source: String,
    skipped: Vec<String>,
    devices: Vec<DeviceRow>,
}

/// Loads every `*.json` in `dir`, name-sorted; unreadable files come back
/// as messages.
fn scan(dir: &Path) -> anyhow::Result<(Vec<ResolvedDevice>, Vec<String>)> {
    let entries = std::fs::read_dir(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for p in paths {
        match load_file(&p) {
            Ok(d) => ok.push(d),
            Err(e) => bad.push(e.to_string()),
        }
    }
    Ok((ok, bad))
}

pub fn devices(args: &DevicesArgs) -> anyhow::Result<bool> {
    let params = args.map.resolve()?;
    let dir = args.dir.clone().or_else(device_dir);
    let (found, skipped, source) = match &dir {
        Some(d) => {
            let (ok, bad) = scan(d)?;
            (ok, bad, d.display().to_string())
        }
        None => {
            let bundled = fixtures()
                .into_iter()
                .map(|m| ResolvedDevice {
                    source: format!("bundled:{}", m.name),
                    model: m,
                })
                .collect();
            (bundled, Vec::new(), "bundled".to_string())
        }
    };
    for msg in &skipped {
        eprintln!("skipped {msg}");
    }
    if found.is_empty() {
        anyhow::bail!("no devices in {source}");
    }

    let step = build_step_circuit(&params);
    let mut rows = Vec::new();
    for dev in found {
        let m = &dev.model;
        let routed = match route_circuit(&step, m, RoutingObjective::MinSwaps) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("skipped {}: {e}", m.name);
                continue;
            }
        };
        rows.push(DeviceRow {
            name: m.name.clone(),
            source: dev.source.clone(),
            t_dec_us: avg_decoherence(m, &routed.placement)?,
            e_tot: total_relative_error(&routed, m, &readout_layout(&routed))?,
            exec_time_us: execution_time(&routed, m),
            placement: routed.placement,
            swaps: routed.swap_count,
        });
    }
    rows.sort_by(|a, b| a.e_tot.total_cmp(&b.e_tot).then_with(|| a.name.cmp(&b.name)));

    let mut table = format!(
        "{}\nname\tplacement\tswaps\tT_dec_us\tE_tot\texec_us\n",
        header(&params)
    );
    let mut csv = String::from("name,placement,swaps,t_dec_us,e_tot,exec_time_us\n");
    for r in &rows {
        let placement = r.placement.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(
            table,
            "{}\t{placement}\t{}\t{:.2}\t{}\t{:.3}",
            r.name,
            r.swaps,
            r.t_dec_us,
            fixed(r.e_tot),
            r.exec_time_us
        )?;
        writeln!(
            csv,
            "{},{placement},{},{},{},{}",
            r.name, r.swaps, r.t_dec_us, r.e_tot, r.exec_time_us
        )?;
    }
    let clean = skipped.is_empty();
    let report = DevicesReport {
        schema_version: SCHEMA_VERSION,
        command: "devices",
        params,
        source,
        skipped,
        devices: rows,
    };
    let mut staged = Staged::default();
    if args.output.format == Format::Csv {
        staged.add("devices.csv", csv);
    }
    staged.add_json("devices.json", &report)?;
    finish(table, staged, args.output.out.as_ref())?;
    Ok(clean)
}

#[derive(Debug, Clone, Args)]
pub struct CircuitArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Route onto this device file or name
    #[arg(long)]
    pub device: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct CircuitReport {
    schema_version: u32,
    command: &'static str,
    params: MapParams,
    counts: Counts,
    circuit: Circuit,
    #[serde(skip_serializing_if = "Option::is_none")]
    device: Option<ResolvedDevice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    routed: Option<sawtooth::device::RoutedCircuit>,
}

#[derive(Debug, Serialize)]
struct Counts {
    h: usize,
    p: usize,
    cp: usize,
    swap: usize,
    single_qubit: usize,
    two_qubit: usize,
}

fn counts(c: &Circuit) -> Counts {
    Counts {
        h: c.count(GateKind::H),
        p: c.count(GateKind::P),
        cp: c.count(GateKind::CP),
        swap: c.count(GateKind::SWAP),
        single_qubit: c.single_qubit_count(),
        two_qubit: c.two_qubit_count(),
    }
}

fn gates_csv(c: &Circuit) -> String {
    let mut s = String::from("index,kind,qubits,angle\n");
    for (i, g) in c.gates().iter().enumerate() {
        let qs = g.qubits().iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ");
        let angle = g.angle().map(|a| a.to_string()).unwrap_or_default();
        s.push_str(&format!("{i},{:?},{qs},{angle}\n", g.kind()));
    }
    s
}

pub fn circuit(args: &CircuitArgs) -> anyhow::Result<()> {
    let params = args.map.resolve()?;
    let step = build_step_circuit(&params);
    let device = args.device.as_deref().map(resolve_device).transpose()?;
    let routed = device
        .as_ref()
        .map(|d| route_circuit(&step, &d.model, RoutingObjective::MinSwaps))
        .transpose()?;
    let c = counts(&step);
    let mut table = format!(
        "{}\nH={} P={} CP={} single-qubit={} two-qubit={}\n",
        header(&params),
        c.h,
        c.p,
        c.cp,
        c.single_qubit,
        c.two_qubit
    );
    if let (Some(r), Some(d)) = (&routed, &device) {
        writeln!(
            table,
            "routed on {}: placement {:?}, {} SWAPs, {} two-qubit gates",
            d.model.name,
            r.placement,
            r.swap_count,
            r.circuit.two_qubit_count()
        )?;
    }
    let mut staged = Staged::default();
    if args.output.format == Format::Csv {
        staged.add(
            "gates.csv",
            gates_csv(routed.as_ref().map(|r| &r.circuit).unwrap_or(&step)),
        );
    }
    let report = CircuitReport {
        schema_version: SCHEMA_VERSION,
        command: "circuit",
        params,
        counts: c,
        circuit: step,
        device,
        routed,
    };
    staged.add_json("circuit.json", &report)?;
    finish(table, staged, args.output.out.as_ref())
}
