//! Device calibrations, SWAP routing onto coupling maps, serial timing and
//! the two device-quality metrics (average decoherence time and summed
//! relative error).

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitCalibration {
    #[serde(rename = "t1_us")]
    pub t1: f64,
    #[serde(rename = "t2_us")]
    pub t2: f64,
    /// P(read 1 | prepared 0).
    pub readout_p01: f64,
    /// P(read 0 | prepared 1).
    pub readout_p10: f64,
}

impl QubitCalibration {
    pub fn ideal() -> Self {
        QubitCalibration {
            t1: f64::INFINITY,
            t2: f64::INFINITY,
            readout_p01: 0.0,
            readout_p10: 0.0,
        }
    }

    pub fn decoherence_time(&self) -> f64 {
        self.t1.min(self.t2)
    }
}

/// Uniform per-class gate errors and durations over a coupling graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceModel {
    pub name: String,
    pub qubits: Vec<QubitCalibration>,
    pub coupling: Vec<[usize; 2]>,
    pub err_1q: f64,
    pub err_2q: f64,
    #[serde(rename = "dur_1q_ns")]
    pub dur_1q: f64,
    #[serde(rename = "dur_2q_ns")]
    pub dur_2q: f64,
    #[serde(rename = "readout_duration_ns")]
    pub readout_duration: f64,
}

impl DeviceModel {
    pub fn validate(&self) -> Result<()> {
        if self.qubits.is_empty() {
            return Err(Error::config("qubits", "device has no qubits"));
        }
        for (i, q) in self.qubits.iter().enumerate() {
            if !(q.t1 > 0.0) {
                return Err(Error::config(
                    format!("qubits[{i}].t1_us"),
                    format!("must be positive, got {}", q.t1),
                ));
            }
            if !(q.t2 > 0.0) {
                return Err(Error::config(
                    format!("qubits[{i}].t2_us"),
                    format!("must be positive, got {}", q.t2),
                ));
            }
            if q.t2 > 2.0 * q.t1 {
                return Err(Error::config(
                    format!("qubits[{i}].t2_us"),
                    format!("t2 = {} exceeds 2 * t1 = {}", q.t2, 2.0 * q.t1),
                ));
            }
            for (field, p) in [("readout_p01", q.readout_p01), ("readout_p10", q.readout_p10)] {
                if !(0.0..1.0).contains(&p) {
                    return Err(Error::config(
                        format!("qubits[{i}].{field}"),
                        format!("{p} outside [0, 1)"),
                    ));
                }
            }
        }
        for (i, &[a, b]) in self.coupling.iter().enumerate() {
            if a >= self.qubits.len() || b >= self.qubits.len() || a == b {
                return Err(Error::config(
                    format!("coupling[{i}]"),
                    format!("invalid edge [{a}, {b}]"),
                ));
            }
        }
        for (field, e) in [("err_1q", self.err_1q), ("err_2q", self.err_2q)] {
            if !(0.0..1.0).contains(&e) {
                return Err(Error::config(field, format!("{e} outside [0, 1)")));
            }
        }
        for (field, d) in [("dur_1q_ns", self.dur_1q), ("dur_2q_ns", self.dur_2q)] {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::config(field, format!("must be positive, got {d}")));
            }
        }
        if !(self.readout_duration >= 0.0) || !self.readout_duration.is_finite() {
            return Err(Error::config("readout_duration_ns", "must be non-negative"));
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.coupling
            .iter()
            .any(|&[x, y]| (x == a && y == b) || (x == b && y == a))
    }

    /// Sorted, deduplicated undirected edges `(a, b)` with `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let set: BTreeSet<(usize, usize)> = self.coupling.iter().map(|&[a, b]| (a.min(b), a.max(b))).collect();
        set.into_iter().collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("device models serialize")
    }

    /// Fully connected, noiseless device with `n` qubits.
    pub fn ideal(n: usize) -> Self {
        let mut coupling = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                coupling.push([a, b]);
            }
        }
        DeviceModel {
            name: "ideal".into(),
            qubits: vec![QubitCalibration::ideal(); n],
            coupling,
            err_1q: 0.0,
            err_2q: 0.0,
            dur_1q: 1.0,
            dur_2q: 1.0,
            readout_duration: 0.0,
        }
    }
}

/// Parses and validates a JSON device description; unknown fields are
/// rejected.
pub fn load_device_model(source: &str) -> Result<DeviceModel> {
    let model: DeviceModel = serde_json::from_str(source).map_err(|e| Error::config("device", e.to_string()))?;
    model.validate()?;
    Ok(model)
}

const FIXTURES: [(&str, &str); 6] = [
    ("athens", include_str!("../devices/athens.json")),
    ("belem", include_str!("../devices/belem.json")),
    ("lima", include_str!("../devices/lima.json")),
    ("quito", include_str!("../devices/quito.json")),
    ("santiago", include_str!("../devices/santiago.json")),
    ("yorktown", include_str!("../devices/yorktown.json")),
];

/// Bundled device fixtures, sorted by name.
pub fn fixtures() -> Vec<DeviceModel> {
    FIXTURES
        .iter()
        .map(|(_, text)| load_device_model(text).expect("bundled fixtures are valid"))
        .collect()
}

pub fn fixture(name: &str) -> Option<DeviceModel> {
    FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| load_device_model(text).expect("bundled fixtures are valid"))
}

pub fn fixture_source(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoutingObjective {
    MinSwaps,
    MinTime,
}

/// Logical circuit rewritten onto physical qubits.
///
/// `circuit` spans every device qubit. Its `relabel` maps each logical index
/// (the `logical_n` circuit qubits first, then the idle wires in ascending
/// physical order) to the physical wire holding it at the end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoutedCircuit {
    pub circuit: Circuit,
    pub logical_n: u32,
    /// Logical qubit to physical qubit before the first gate.
    pub placement: Vec<usize>,
    /// Logical qubit to physical qubit after the last gate.
    pub final_layout: Vec<usize>,
    pub swap_count: usize,
}

impl RoutedCircuit {
    /// Physical qubits the circuit touches or holds data on, ascending.
    pub fn active_qubits(&self) -> Vec<usize> {
        let mut set: BTreeSet<usize> = self.placement.iter().copied().collect();
        for g in self.circuit.gates() {
            set.extend(g.qubits());
        }
        set.into_iter().collect()
    }

    /// Full logical-to-physical map at the start, idle wires included.
    pub fn initial_full_layout(&self) -> Vec<usize> {
        full_layout(&self.placement, self.circuit.n() as usize)
    }
}

fn full_layout(placement: &[usize], n_dev: usize) -> Vec<usize> {
    let mut full = placement.to_vec();
    full.extend((0..n_dev).filter(|p| !placement.contains(p)));
    full
}

#[derive(Debug, Clone, Copy)]
enum Action {
    Swap(usize, usize),
    Exec,
}

/// Minimum-SWAP routing of `circuit` from a fixed starting placement.
///
/// Shortest path over `(gate index, layout)` states: executing an
/// executable gate is free, a SWAP on any coupling edge costs one. Gate
/// order is preserved.
pub fn route_with_placement(circuit: &Circuit, device: &DeviceModel, placement: &[usize]) -> Result<RoutedCircuit> {
    let n = circuit.n() as usize;
    let n_dev = device.num_qubits();
    if n > n_dev {
        return Err(Error::Routing(format!("{n} logical qubits on a {n_dev}-qubit device")));
    }
    if placement.len() != n || placement.iter().any(|&p| p >= n_dev) || !distinct(placement) {
        return Err(Error::Routing(format!("invalid placement {placement:?}")));
    }
    let gates = circuit.gates();
    let edges = device.edges();
    let mut adjacency = vec![vec![false; n_dev]; n_dev];
    for &(a, b) in &edges {
        adjacency[a][b] = true;
        adjacency[b][a] = true;
    }
    let executable = |g: &Gate, layout: &[usize]| match *g {
        Gate::CP(a, b, _) | Gate::Swap(a, b) => adjacency[layout[a]][layout[b]],
        _ => true,
    };

    type State = (usize, Vec<usize>);
    let start: State = (0, placement.to_vec());
    let mut best: HashMap<State, usize> = HashMap::new();
    let mut parent: HashMap<State, (State, Action)> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(start.clone(), 0);
    heap.push(Reverse((0usize, Reverse(0usize), start.1.clone())));
    let mut goal = None;

    while let Some(Reverse((cost, Reverse(i), layout))) = heap.pop() {
        let state = (i, layout.clone());
        if best.get(&state).is_some_and(|&c| c < cost) {
            continue;
        }
        if i == gates.len() {
            goal = Some(state);
            break;
        }
        let mut relax = |next: State, c: usize, action: Action| {
            if best.get(&next).is_none_or(|&old| c < old) {
                best.insert(next.clone(), c);
                parent.insert(next.clone(), (state.clone(), action));
                heap.push(Reverse((c, Reverse(next.0), next.1)));
            }
        };
        if executable(&gates[i], &layout) {
            relax((i + 1, layout.clone()), cost, Action::Exec);
        }
        for &(a, b) in &edges {
            let qa = layout.iter().position(|&p| p == a);
            let qb = layout.iter().position(|&p| p == b);
            if qa.is_none() && qb.is_none() {
                continue;
            }
            let mut next = layout.clone();
            if let Some(q) = qa {
                next[q] = b;
            }
            if let Some(q) = qb {
                next[q] = a;
            }
            relax((i, next), cost + 1, Action::Swap(a, b));
        }
    }

    let goal = goal.ok_or_else(|| {
        Error::Routing(format!(
            "placement {placement:?} cannot reach every interacting pair on {}",
            device.name
        ))
    })?;

    let mut actions = Vec::new();
    let mut cur = goal;
    while let Some((prev, action)) = parent.get(&cur) {
        actions.push(*action);
        cur = prev.clone();
    }
    actions.reverse();

    let mut full = full_layout(placement, n_dev);
    let mut out = Circuit::new(n_dev as u32);
    let mut swaps = 0;
    let mut next_gate = 0;
    for action in actions {
        match action {
            Action::Swap(a, b) => {
                out.push(Gate::swap(a, b));
                for p in full.iter_mut() {
                    if *p == a {
                        *p = b;
                    } else if *p == b {
                        *p = a;
                    }
                }
                swaps += 1;
            }
            Action::Exec => {
                out.push(gates[next_gate].remapped(|q| full[q]));
                next_gate += 1;
            }
        }
    }
    debug_assert_eq!(next_gate, gates.len());
    let mut relabel: Vec<usize> = circuit.relabel().iter().map(|&q| full[q]).collect();
    relabel.extend_from_slice(&full[n..]);
    out.set_relabel(relabel)?;
    Ok(RoutedCircuit {
        circuit: out,
        logical_n: n as u32,
        placement: placement.to_vec(),
        final_layout: full[..n].to_vec(),
        swap_count: swaps,
    })
}

fn distinct(xs: &[usize]) -> bool {
    let set: BTreeSet<_> = xs.iter().collect();
    set.len() == xs.len()
}

/// All injective placements of `n` logical qubits on `n_dev` physical ones,
/// lexicographically ordered.
pub fn placements(n: usize, n_dev: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, n_dev: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for p in 0..n_dev {
            if !cur.contains(&p) {
                cur.push(p);
                rec(n, n_dev, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, n_dev, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive placement search; ties go to the lexicographically first
/// placement.
pub fn route_circuit(circuit: &Circuit, device: &DeviceModel, objective: RoutingObjective) -> Result<RoutedCircuit> {
    let n = circuit.n() as usize;
    if n > device.num_qubits() {
        return Err(Error::Routing(format!(
            "{n} logical qubits on a {}-qubit device",
            device.num_qubits()
        )));
    }
    let mut best: Option<(f64, f64, RoutedCircuit)> = None;
    for placement in placements(n, device.num_qubits()) {
        let Ok(routed) = route_with_placement(circuit, device, &placement) else {
            continue;
        };
        let time = execution_time(&routed, device);
        let swaps = routed.swap_count as f64;
        let key = match objective {
            RoutingObjective::MinSwaps => (swaps, time),
            RoutingObjective::MinTime => (time, swaps),
        };
        if best.as_ref().is_none_or(|(a, b, _)| key < (*a, *b)) {
            best = Some((key.0, key.1, routed));
        }
    }
    best.map(|(_, _, r)| r)
        .ok_or_else(|| Error::Routing(format!("no placement of {n} qubits on {} is routable", device.name)))
}

/// Serial schedule in microseconds: every gate back to back (SWAP as three
/// two-qubit gates) plus the readout window.
pub fn execution_time(routed: &RoutedCircuit, device: &DeviceModel) -> f64 {
    let gates_ns: f64 = routed.circuit.gates().iter().map(|g| gate_duration(g, device)).sum();
    (gates_ns + device.readout_duration) / 1000.0
}

pub(crate) fn gate_duration(g: &Gate, device: &DeviceModel) -> f64 {
    match g {
        Gate::H(_) | Gate::P(..) => device.dur_1q,
        Gate::CP(..) => device.dur_2q,
        Gate::Swap(..) => 3.0 * device.dur_2q,
    }
}

/// Mean of `min(t1, t2)` over `qubits`, in microseconds.
pub fn avg_decoherence(device: &DeviceModel, qubits: &[usize]) -> Result<f64> {
    if qubits.is_empty() {
        return Err(Error::domain("no qubits to average over"));
    }
    let mut sum = 0.0;
    for &q in qubits {
        let cal = device
            .qubits
            .get(q)
            .ok_or_else(|| Error::domain(format!("qubit {q} not on device {}", device.name)))?;
        sum += cal.decoherence_time();
    }
    Ok(sum / qubits.len() as f64)
}

/// Sum of per-gate relative errors (SWAP counts three two-qubit gates) plus
/// the mean assignment error of every measured qubit.
pub fn total_relative_error(routed: &RoutedCircuit, device: &DeviceModel, measured: &[usize]) -> Result<f64> {
    let gates: f64 = routed
        .circuit
        .gates()
        .iter()
        .map(|g| match g {
            Gate::H(_) | Gate::P(..) => device.err_1q,
            Gate::CP(..) => device.err_2q,
            Gate::Swap(..) => 3.0 * device.err_2q,
        })
        .sum();
    let mut readout = 0.0;
    for &q in measured {
        let cal = device
            .qubits
            .get(q)
            .ok_or_else(|| Error::domain(format!("qubit {q} not on device {}", device.name)))?;
        readout += (cal.readout_p01 + cal.readout_p10) / 2.0;
    }
    Ok(gates + readout)
}
