//! Gate-level sawtooth step: diagonal kick block, swap-free QFT, diagonal
//! rotation block, inverse QFT.
//!
//! Qubit `j - 1` carries bit `alpha_j` of the binary expansion
//! `x = sum_j alpha_j 2^{-j}`, i.e. qubit 0 is the most significant bit.
//! The QFT leaves its output bit-reversed; that reversal is carried as
//! `relabel` metadata rather than SWAP gates.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::StepUnitary;
use crate::kernels::{self, bit_of, phase};
use crate::params::MapParams;
use crate::state::StateVector;

/// Largest register for dense unitary extraction.
pub const MAX_DENSE_QUBITS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    H,
    P,
    CP,
    SWAP,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    P(usize, f64),
    /// Stored with `a < b`; the gate is symmetric in its qubits.
    CP(usize, usize, f64),
    Swap(usize, usize),
}

impl Gate {
    pub fn cp(a: usize, b: usize, angle: f64) -> Gate {
        assert_ne!(a, b, "CP needs two distinct qubits");
        Gate::CP(a.min(b), a.max(b), angle)
    }

    pub fn swap(a: usize, b: usize) -> Gate {
        assert_ne!(a, b, "SWAP needs two distinct qubits");
        Gate::Swap(a.min(b), a.max(b))
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::P(..) => GateKind::P,
            Gate::CP(..) => GateKind::CP,
            Gate::Swap(..) => GateKind::SWAP,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::P(q, _) => vec![q],
            Gate::CP(a, b, _) | Gate::Swap(a, b) => vec![a, b],
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::P(_, a) | Gate::CP(_, _, a) => Some(a),
            _ => None,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::CP(..) | Gate::Swap(..))
    }

    /// Same gate with its qubits renamed by `map`.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(map(q)),
            Gate::P(q, a) => Gate::P(map(q), a),
            Gate::CP(a, b, t) => Gate::cp(map(a), map(b), t),
            Gate::Swap(a, b) => Gate::swap(map(a), map(b)),
        }
    }

    /// Inverse gate.
    pub fn adjoint(&self) -> Gate {
        match *self {
            Gate::P(q, a) => Gate::P(q, -a),
            Gate::CP(a, b, t) => Gate::CP(a, b, -t),
            g => g,
        }
    }

    pub(crate) fn apply(&self, amps: &mut [C64], nq: u32) {
        match *self {
            Gate::H(q) => kernels::apply_h(amps, nq, q),
            Gate::P(q, a) => kernels::apply_phase_mask(amps, bit_of(nq, q), phase(a)),
            Gate::CP(a, b, t) => kernels::apply_phase_mask(amps, bit_of(nq, a) | bit_of(nq, b), phase(t)),
            Gate::Swap(a, b) => kernels::apply_swap(amps, nq, a, b),
        }
    }

    /// Applies the complex conjugate of the gate matrix.
    pub(crate) fn apply_conj(&self, amps: &mut [C64], nq: u32) {
        match *self {
            Gate::P(q, a) => Gate::P(q, -a).apply(amps, nq),
            Gate::CP(a, b, t) => Gate::CP(a, b, -t).apply(amps, nq),
            g => g.apply(amps, nq),
        }
    }
}

/// Interchange record `{kind, qubits, angle}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateRecord {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    #[serde(default)]
    pub angle: Option<f64>,
}

impl From<&Gate> for GateRecord {
    fn from(g: &Gate) -> Self {
        GateRecord {
            kind: g.kind(),
            qubits: g.qubits(),
            angle: g.angle(),
        }
    }
}

impl TryFrom<&GateRecord> for Gate {
    type Error = Error;

    fn try_from(r: &GateRecord) -> Result<Gate> {
        let bad = |msg: &str| Error::domain(format!("gate record {r:?}: {msg}"));
        let angle = || r.angle.ok_or_else(|| bad("missing angle"));
        let distinct = |a: usize, b: usize| if a == b { Err(bad("qubits must differ")) } else { Ok(()) };
        match (r.kind, r.qubits.as_slice()) {
            (GateKind::H, &[q]) if r.angle.is_none() => Ok(Gate::H(q)),
            (GateKind::P, &[q]) => Ok(Gate::P(q, angle()?)),
            (GateKind::CP, &[a, b]) => {
                distinct(a, b)?;
                Ok(Gate::cp(a, b, angle()?))
            }
            (GateKind::SWAP, &[a, b]) if r.angle.is_none() => {
                distinct(a, b)?;
                Ok(Gate::swap(a, b))
            }
            _ => Err(bad("wrong qubit count or stray angle")),
        }
    }
}

/// Ordered gate list plus the output relabeling.
///
/// `relabel[q]` is the wire that holds logical qubit `q` once all gates
/// have run.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n: u32,
    gates: Vec<Gate>,
    relabel: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitRecord {
    n: u32,
    gates: Vec<GateRecord>,
    relabel: Vec<usize>,
}

impl Circuit {
    pub fn new(n: u32) -> Self {
        Circuit {
            n,
            gates: Vec::new(),
            relabel: (0..n as usize).collect(),
        }
    }

    pub fn from_parts(n: u32, gates: Vec<Gate>, relabel: Vec<usize>) -> Result<Self> {
        let c = Circuit { n, gates, relabel };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n as usize;
        if !is_permutation(&self.relabel, n) {
            return Err(Error::Invariant(format!(
                "relabel {:?} is not a permutation of 0..{n}",
                self.relabel
            )));
        }
        for g in &self.gates {
            let qs = g.qubits();
            if qs.iter().any(|&q| q >= n) {
                return Err(Error::Invariant(format!("gate {g:?} addresses a qubit >= {n}")));
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(Error::Invariant(format!("gate {g:?} repeats a qubit")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn relabel(&self) -> &[usize] {
        &self.relabel
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn set_relabel(&mut self, relabel: Vec<usize>) -> Result<()> {
        if !is_permutation(&relabel, self.n as usize) {
            return Err(Error::Invariant("relabel is not a permutation".into()));
        }
        self.relabel = relabel;
        Ok(())
    }

    /// Appends `other`, reading its qubit indices as logical labels of the
    /// current output. `unitary(self.append(other)) = unitary(other) * unitary(self)`.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n != self.n {
            return Err(Error::domain("appending circuits of different widths"));
        }
        let wires = self.relabel.clone();
        self.gates.extend(other.gates.iter().map(|g| g.remapped(|q| wires[q])));
        self.relabel = other.relabel.iter().map(|&q| wires[q]).collect();
        Ok(())
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }

    pub fn single_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| !g.is_two_qubit()).count()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.record()).expect("circuit records serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: CircuitRecord = serde_json::from_str(text).map_err(|e| Error::domain(format!("circuit json: {e}")))?;
        let gates = rec.gates.iter().map(Gate::try_from).collect::<Result<Vec<_>>>()?;
        Circuit::from_parts(rec.n, gates, rec.relabel)
    }

    fn record(&self) -> CircuitRecord {
        CircuitRecord {
            n: self.n,
            gates: self.gates.iter().map(GateRecord::from).collect(),
            relabel: self.relabel.clone(),
        }
    }
}

impl Serialize for Circuit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.record().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = CircuitRecord::deserialize(d)?;
        let gates = rec
            .gates
            .iter()
            .map(Gate::try_from)
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Circuit::from_parts(rec.n, gates, rec.relabel).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn is_permutation(p: &[usize], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &x in p {
        if x >= n || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

/// Maps a wire-ordered basis index to the logical ordering given by `relabel`.
pub(crate) fn relabel_index(b: usize, nq: u32, relabel: &[usize]) -> usize {
    let mut out = 0;
    for (logical, &wire) in relabel.iter().enumerate() {
        if b & bit_of(nq, wire) != 0 {
            out |= bit_of(nq, logical);
        }
    }
    out
}

/// Phases of one diagonal block: one P angle per qubit and one CP angle per
/// qubit pair `a < b` (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalAngles {
    pub p: Vec<f64>,
    pub cp: Vec<((usize, usize), f64)>,
}

impl DiagonalAngles {
    /// Gates on logical qubits `0..n`.
    pub fn to_circuit(&self, n: u32) -> Circuit {
        let mut c = Circuit::new(n);
        for (q, &a) in self.p.iter().enumerate() {
            c.push(Gate::P(q, a));
        }
        for &((a, b), t) in &self.cp {
            c.push(Gate::cp(a, b, t));
        }
        c
    }
}

/// Kick-block angles for `U_k = e^{i k (theta - pi)^2 / 2}` in the angle basis:
/// `P_j = -2 pi^2 k / 2^j + pi^2 k / 2^{2j-1}`,
/// `CP_{j1 j2} = 2 pi^2 k / 2^{j1 + j2 - 1}` (1-based `j`).
pub fn uk_angles(params: &MapParams) -> DiagonalAngles {
    let k = params.k;
    let pi2 = PI * PI;
    diagonal_angles(
        params.n,
        |j| -2.0 * pi2 * k / 2f64.powi(j) + pi2 * k / 2f64.powi(2 * j - 1),
        |j1, j2| 2.0 * pi2 * k / 2f64.powi(j1 + j2 - 1),
    )
}

/// Rotation-block angles for `U_T = e^{-i T m^2 / 2}` in the momentum basis:
/// `P_j = 2 N^2 T / 2^{j+2} - N^2 T / 2^{2j+1}`,
/// `CP_{j1 j2} = -2 N^2 T / 2^{j1 + j2 + 1}`.
pub fn ut_angles(params: &MapParams) -> DiagonalAngles {
    let nn_t = (params.dim as f64).powi(2) * params.period;
    diagonal_angles(
        params.n,
        |j| 2.0 * nn_t / 2f64.powi(j + 2) - nn_t / 2f64.powi(2 * j + 1),
        |j1, j2| -2.0 * nn_t / 2f64.powi(j1 + j2 + 1),
    )
}

fn diagonal_angles(n: u32, p: impl Fn(i32) -> f64, cp: impl Fn(i32, i32) -> f64) -> DiagonalAngles {
    let n = n as i32;
    let p = (1..=n).map(&p).collect();
    let mut pairs = Vec::new();
    for j1 in 1..=n {
        for j2 in (j1 + 1)..=n {
            pairs.push((((j1 - 1) as usize, (j2 - 1) as usize), cp(j1, j2)));
        }
    }
    DiagonalAngles { p, cp: pairs }
}

/// Swap-free QFT with `relabel` set to bit reversal.
///
/// Forward: `|x> -> N^{-1/2} sum_y e^{2 pi i x y / N} |y>` once the reversal is
/// applied. The inverse circuit runs the adjoint gates in reverse order on
/// mirrored wires, so it too ends bit-reversed and its unitary is the
/// inverse transform.
pub fn build_qft(n: u32, inverse: bool) -> Circuit {
    let nq = n as usize;
    let mut gates = Vec::with_capacity(nq * (nq + 1) / 2);
    for j in 0..nq {
        gates.push(Gate::H(j));
        for l in (j + 1)..nq {
            gates.push(Gate::cp(j, l, PI / 2f64.powi((l - j) as i32)));
        }
    }
    if inverse {
        gates = gates
            .iter()
            .rev()
            .map(|g| g.adjoint().remapped(|q| nq - 1 - q))
            .collect();
    }
    Circuit {
        n,
        gates,
        relabel: (0..nq).rev().collect(),
    }
}

/// One map step on a register in the momentum basis:
/// QFT to the angle basis, kick block, inverse QFT, rotation block.
/// Output relabeling is the identity.
pub fn build_step_circuit(params: &MapParams) -> Circuit {
    build_step_circuit_from(params.n, &uk_angles(params), &ut_angles(params))
}

/// Step circuit from explicit block angles.
pub fn build_step_circuit_from(n: u32, kick: &DiagonalAngles, rotation: &DiagonalAngles) -> Circuit {
    let mut c = build_qft(n, false);
    c.append(&kick.to_circuit(n)).expect("same width");
    c.append(&build_qft(n, true)).expect("same width");
    c.append(&rotation.to_circuit(n)).expect("same width");
    c
}

/// `t` steps back to back.
pub fn repeat(circuit: &Circuit, t: usize) -> Circuit {
    let mut c = Circuit::new(circuit.n);
    for _ in 0..t {
        c.append(circuit).expect("same width");
    }
    c
}

/// Dense product of all gates followed by the relabel permutation.
pub fn circuit_unitary(circuit: &Circuit) -> Result<StepUnitary> {
    if circuit.n > MAX_DENSE_QUBITS {
        return Err(Error::Capability(format!(
            "dense unitary limited to n <= {MAX_DENSE_QUBITS}, got {}",
            circuit.n
        )));
    }
    let dim = 1usize << circuit.n;
    let mut matrix = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let psi = StateVector::computational(circuit.n, col)?;
        let out = apply_circuit(&psi, circuit)?;
        for (row, a) in out.amplitudes().iter().enumerate() {
            matrix[(row, col)] = *a;
        }
    }
    StepUnitary::from_matrix(matrix)
}

/// Statevector execution with in-place kernels.
pub fn apply_circuit(psi: &StateVector, circuit: &Circuit) -> Result<StateVector> {
    if psi.n() != circuit.n {
        return Err(Error::domain(format!(
            "state has {} qubits, circuit has {}",
            psi.n(),
            circuit.n
        )));
    }
    let mut out = psi.clone();
    let amps = out.amplitudes_mut();
    for g in &circuit.gates {
        g.apply(amps, circuit.n);
    }
    if circuit.relabel.iter().enumerate().any(|(i, &w)| i != w) {
        let mut permuted = vec![C64::new(0.0, 0.0); amps.len()];
        for (b, a) in amps.iter().enumerate() {
            permuted[relabel_index(b, circuit.n, &circuit.relabel)] = *a;
        }
        amps.copy_from_slice(&permuted);
    }
    Ok(out)
}
