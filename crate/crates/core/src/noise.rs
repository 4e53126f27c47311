//! Density-matrix execution of routed circuits under calibrated noise.
//!
//! Every gate is followed by depolarizing noise on its qubits and by thermal
//! relaxation of every register qubit for the gate's duration (serial
//! schedule, idle qubits relax too). Readout confusion acts on the final
//! classical distribution, and shot noise is drawn from it.
//!
//! A density matrix on `nq` qubits is handled as a `2 nq`-qubit vector:
//! row qubit `q` is vector qubit `q`, column qubit `q` is vector qubit
//! `q + nq`. `K rho K^dagger` is then `K` on the row qubits and `conj(K)` on
//! the column qubits.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::{build_step_circuit, Gate};
use crate::device::{route_circuit, route_with_placement, DeviceModel, RoutedCircuit, RoutingObjective};
use crate::error::{Error, Result};
use crate::kernels::{apply_1q, apply_2q, bit_of};
use crate::params::MapParams;
use crate::seed::derive;
use crate::state::{index_of_momentum, DensityMatrix, MomentumDistribution};

/// Row-major `d x d` operator, `d = 2^arity`.
pub type KrausOp = Vec<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseChannel {
    /// With probability `p` the qubit is replaced by `I/2`.
    Depolarizing1q { p: f64 },
    /// With probability `p` the pair is replaced by `I/4`.
    Depolarizing2q { p: f64 },
    /// Amplitude damping `1 - e^{-d/T1}` followed by pure dephasing at
    /// `1/T_phi = 1/T2 - 1/(2 T1)`. Times in microseconds.
    ThermalRelaxation { t1: f64, t2: f64, duration: f64 },
    /// Assignment errors as a channel; its diagonal action is the confusion
    /// matrix `[[1 - p01, p10], [p01, 1 - p10]]`.
    ReadoutConfusion { p01: f64, p10: f64 },
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

impl NoiseChannel {
    pub fn depolarizing_1q(p: f64) -> Result<Self> {
        check_prob("depolarizing probability", p)?;
        Ok(NoiseChannel::Depolarizing1q { p })
    }

    pub fn depolarizing_2q(p: f64) -> Result<Self> {
        check_prob("depolarizing probability", p)?;
        Ok(NoiseChannel::Depolarizing2q { p })
    }

    /// `duration` in microseconds.
    pub fn thermal_relaxation(t1: f64, t2: f64, duration: f64) -> Result<Self> {
        if !(t1 > 0.0) || !(t2 > 0.0) {
            return Err(Error::Physicality(format!(
                "relaxation times must be positive (t1 = {t1}, t2 = {t2})"
            )));
        }
        if t2 > 2.0 * t1 {
            return Err(Error::Physicality(format!("t2 = {t2} exceeds 2 * t1 = {}", 2.0 * t1)));
        }
        if !(duration >= 0.0) {
            return Err(Error::Physicality(format!("negative duration {duration}")));
        }
        Ok(NoiseChannel::ThermalRelaxation { t1, t2, duration })
    }

    pub fn readout_confusion(p01: f64, p10: f64) -> Result<Self> {
        check_prob("p01", p01)?;
        check_prob("p10", p10)?;
        Ok(NoiseChannel::ReadoutConfusion { p01, p10 })
    }

    pub fn arity(&self) -> usize {
        match self {
            NoiseChannel::Depolarizing2q { .. } => 2,
            _ => 1,
        }
    }

    /// True when the channel is exactly the identity map.
    pub fn is_identity(&self) -> bool {
        match *self {
            NoiseChannel::Depolarizing1q { p } | NoiseChannel::Depolarizing2q { p } => p == 0.0,
            NoiseChannel::ThermalRelaxation { t1, t2, duration } => {
                duration == 0.0 || (t1.is_infinite() && t2.is_infinite())
            }
            NoiseChannel::ReadoutConfusion { p01, p10 } => p01 == 0.0 && p10 == 0.0,
        }
    }

    pub fn kraus(&self) -> Vec<KrausOp> {
        let z = c(0.0);
        match *self {
            NoiseChannel::Depolarizing1q { p } => {
                let paulis = pauli_1q();
                let mut ops = vec![scale(&paulis[0], (1.0 - 3.0 * p / 4.0).sqrt())];
                ops.extend(paulis[1..].iter().map(|m| scale(m, (p / 4.0).sqrt())));
                ops
            }
            NoiseChannel::Depolarizing2q { p } => {
                let paulis = pauli_1q();
                let mut ops = Vec::with_capacity(16);
                for (i, a) in paulis.iter().enumerate() {
                    for (j, b) in paulis.iter().enumerate() {
                        let w = if i == 0 && j == 0 {
                            1.0 - 15.0 * p / 16.0
                        } else {
                            p / 16.0
                        };
                        ops.push(scale(&kron2(a, b), w.sqrt()));
                    }
                }
                ops
            }
            NoiseChannel::ThermalRelaxation { t1, t2, duration } => {
                let gamma = 1.0 - (-duration / t1).exp();
                let inv_tphi = (1.0 / t2 - 1.0 / (2.0 * t1)).max(0.0);
                let keep = (-2.0 * duration * inv_tphi).exp();
                let lambda = 1.0 - keep;
                let a0 = [c(1.0), z, z, c((1.0 - gamma).sqrt())];
                let a1 = [z, c(gamma.sqrt()), z, z];
                let b0 = [c(1.0), z, z, c(keep.sqrt())];
                let b1 = [z, z, z, c(lambda.sqrt())];
                let mut ops = Vec::new();
                for b in [&b0, &b1] {
                    for a in [&a0, &a1] {
                        let m = mul2(b, a);
                        if m.iter().any(|x| x.norm() > 0.0) {
                            ops.push(m.to_vec());
                        }
                    }
                }
                ops
            }
            NoiseChannel::ReadoutConfusion { p01, p10 } => vec![
                vec![c((1.0 - p01).sqrt()), z, z, c((1.0 - p10).sqrt())],
                vec![z, c(p10.sqrt()), c(p01.sqrt()), z],
            ],
        }
    }

    /// `max |sum_i K_i^dagger K_i - I|`.
    pub fn completeness_error(&self) -> f64 {
        let d = 1usize << self.arity();
        let mut acc = vec![c(0.0); d * d];
        for k in self.kraus() {
            for r in 0..d {
                for col in 0..d {
                    let mut s = c(0.0);
                    for i in 0..d {
                        s += k[i * d + r].conj() * k[i * d + col];
                    }
                    acc[r * d + col] += s;
                }
            }
        }
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for col in 0..d {
                let target = if r == col { 1.0 } else { 0.0 };
                worst = worst.max((acc[r * d + col] - c(target)).norm());
            }
        }
        worst
    }

    /// Applies the channel to `qubits` of `dm`.
    pub fn apply(&self, dm: &mut DensityMatrix, qubits: &[usize]) -> Result<()> {
        if qubits.len() != self.arity() || qubits.iter().any(|&q| q >= dm.n() as usize) {
            return Err(Error::domain(format!(
                "channel of arity {} on qubits {qubits:?}",
                self.arity()
            )));
        }
        if self.is_identity() {
            return Ok(());
        }
        apply_kraus(dm, qubits, &self.kraus());
        Ok(())
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("{name} {p} outside [0, 1]")));
    }
    Ok(())
}

fn pauli_1q() -> [[C64; 4]; 4] {
    let z = c(0.0);
    let o = c(1.0);
    let i = C64::new(0.0, 1.0);
    [[o, z, z, o], [z, o, o, z], [z, -i, i, z], [o, z, z, -o]]
}

fn scale(m: &[C64], s: f64) -> KrausOp {
    m.iter().map(|x| x * s).collect()
}

fn mul2(a: &[C64; 4], b: &[C64; 4]) -> [C64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn kron2(a: &[C64; 4], b: &[C64; 4]) -> [C64; 16] {
    let mut out = [c(0.0); 16];
    for ar in 0..2 {
        for ac in 0..2 {
            for br in 0..2 {
                for bc in 0..2 {
                    out[(2 * ar + br) * 4 + 2 * ac + bc] = a[2 * ar + ac] * b[2 * br + bc];
                }
            }
        }
    }
    out
}

fn apply_kraus(dm: &mut DensityMatrix, qubits: &[usize], ops: &[KrausOp]) {
    let nq = dm.n();
    let wide = 2 * nq;
    let src = dm.entries().to_vec();
    let mut acc = vec![c(0.0); src.len()];
    for k in ops {
        let mut work = src.clone();
        let conj: Vec<C64> = k.iter().map(|x| x.conj()).collect();
        match *qubits {
            [q] => {
                let m: [C64; 4] = k.as_slice().try_into().expect("2x2 Kraus operator");
                let mc: [C64; 4] = conj.as_slice().try_into().expect("2x2 Kraus operator");
                apply_1q(&mut work, wide, q, &m);
                apply_1q(&mut work, wide, q + nq as usize, &mc);
            }
            [a, b] => {
                let m: [C64; 16] = k.as_slice().try_into().expect("4x4 Kraus operator");
                let mc: [C64; 16] = conj.as_slice().try_into().expect("4x4 Kraus operator");
                apply_2q(&mut work, wide, a, b, &m);
                apply_2q(&mut work, wide, a + nq as usize, b + nq as usize, &mc);
            }
            _ => unreachable!("channels act on one or two qubits"),
        }
        for (s, w) in acc.iter_mut().zip(work) {
            *s += w;
        }
    }
    *dm.entries_mut() = acc;
}

/// `rho -> G rho G^dagger`.
pub fn apply_gate_dm(dm: &mut DensityMatrix, gate: &Gate) {
    let nq = dm.n() as usize;
    let wide = 2 * dm.n();
    let entries = dm.entries_mut();
    gate.apply(entries, wide);
    gate.remapped(|q| q + nq).apply_conj(entries, wide);
}

/// Per-register-qubit channels for one device.
struct NoiseModel {
    /// Physical qubit of each register position.
    register: Vec<usize>,
    depol_1q: NoiseChannel,
    depol_2q: NoiseChannel,
    relax_1q: Vec<NoiseChannel>,
    relax_2q: Vec<NoiseChannel>,
}

impl NoiseModel {
    fn new(device: &DeviceModel, register: Vec<usize>) -> Result<Self> {
        let relax = |dur_ns: f64| -> Result<Vec<NoiseChannel>> {
            register
                .iter()
                .map(|&p| {
                    let q = &device.qubits[p];
                    NoiseChannel::thermal_relaxation(q.t1, q.t2, dur_ns / 1000.0)
                })
                .collect()
        };
        Ok(NoiseModel {
            depol_1q: NoiseChannel::depolarizing_1q(device.err_1q)?,
            depol_2q: NoiseChannel::depolarizing_2q(device.err_2q)?,
            relax_1q: relax(device.dur_1q)?,
            relax_2q: relax(device.dur_2q)?,
            register,
        })
    }

    fn position(&self, physical: usize) -> Result<usize> {
        self.register
            .iter()
            .position(|&p| p == physical)
            .ok_or_else(|| Error::domain(format!("physical qubit {physical} outside the simulated register")))
    }

    fn relax_all(&self, dm: &mut DensityMatrix, two_qubit: bool) -> Result<()> {
        let channels = if two_qubit { &self.relax_2q } else { &self.relax_1q };
        for (q, ch) in channels.iter().enumerate() {
            ch.apply(dm, &[q])?;
        }
        Ok(())
    }

    fn run(&self, dm: &mut DensityMatrix, routed: &RoutedCircuit) -> Result<()> {
        for g in routed.circuit.gates() {
            let local = g.remapped(|p| self.position(p).expect("register covers routed qubits"));
            apply_gate_dm(dm, &local);
            match local {
                Gate::H(q) | Gate::P(q, _) => {
                    self.depol_1q.apply(dm, &[q])?;
                    self.relax_all(dm, false)?;
                }
                Gate::CP(a, b, _) => {
                    self.depol_2q.apply(dm, &[a, b])?;
                    self.relax_all(dm, true)?;
                }
                Gate::Swap(a, b) => {
                    for _ in 0..3 {
                        self.depol_2q.apply(dm, &[a, b])?;
                        self.relax_all(dm, true)?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_register(routed: &RoutedCircuit, register: &[usize]) -> Result<()> {
    for p in routed.active_qubits() {
        if !register.contains(&p) {
            return Err(Error::domain(format!("register {register:?} misses active qubit {p}")));
        }
    }
    Ok(())
}

/// Physical wire holding each logical qubit once the routed circuit's
/// output relabeling is taken into account.
pub fn readout_layout(routed: &RoutedCircuit) -> Vec<usize> {
    routed.circuit.relabel()[..routed.logical_n as usize].to_vec()
}

/// Noisy execution of `routed` on the register `routed.active_qubits()`
/// (register position `i` holds physical qubit `active[i]`). Gates only; the
/// relabeling is left to the reader, see [`readout_layout`].
pub fn apply_circuit_noisy(dm: &DensityMatrix, routed: &RoutedCircuit, device: &DeviceModel) -> Result<DensityMatrix> {
    apply_circuit_noisy_on(dm, routed, device, &routed.active_qubits())
}

/// As [`apply_circuit_noisy`] with an explicit register (ascending physical
/// qubits that must cover the routed circuit's active qubits).
pub fn apply_circuit_noisy_on(
    dm: &DensityMatrix,
    routed: &RoutedCircuit,
    device: &DeviceModel,
    register: &[usize],
) -> Result<DensityMatrix> {
    device.validate()?;
    if dm.n() as usize != register.len() {
        return Err(Error::domain(format!(
            "density matrix has {} qubits, register has {}",
            dm.n(),
            register.len()
        )));
    }
    check_register(routed, register)?;
    let model = NoiseModel::new(device, register.to_vec())?;
    let mut out = dm.clone();
    model.run(&mut out, routed)?;
    Ok(out)
}

/// Basis state of the register with logical index `b` (over `layout.len()`
/// logical qubits) loaded onto the physical qubits `layout`.
pub fn embed_logical_index(b: usize, layout: &[usize], register: &[usize]) -> Result<usize> {
    let n = layout.len() as u32;
    let nr = register.len() as u32;
    let mut idx = 0;
    for (q, &p) in layout.iter().enumerate() {
        if b & bit_of(n, q) != 0 {
            let pos = register
                .iter()
                .position(|&r| r == p)
                .ok_or_else(|| Error::domain(format!("qubit {p} outside register")))?;
            idx |= bit_of(nr, pos);
        }
    }
    Ok(idx)
}

/// Logical-register populations of `dm`, tracing out register qubits that
/// hold no logical data.
pub fn logical_distribution(dm: &DensityMatrix, layout: &[usize], register: &[usize]) -> Result<MomentumDistribution> {
    let n = layout.len() as u32;
    let nr = register.len() as u32;
    let positions = layout
        .iter()
        .map(|p| {
            register
                .iter()
                .position(|r| r == p)
                .ok_or_else(|| Error::domain(format!("qubit {p} outside register")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut w = vec![0.0; 1 << n];
    for (i, pop) in dm.populations().into_iter().enumerate() {
        let mut b = 0;
        for (q, &pos) in positions.iter().enumerate() {
            if i & bit_of(nr, pos) != 0 {
                b |= bit_of(n, q);
            }
        }
        w[b] += pop;
    }
    Ok(MomentumDistribution::from_populations(w))
}

/// Per-qubit confusion matrices on the basis-index distribution. Logical
/// qubit `q` is read out on physical qubit `placement[q]`.
pub fn measure_readout(
    dist: &MomentumDistribution,
    device: &DeviceModel,
    placement: &[usize],
) -> Result<MomentumDistribution> {
    let n = dist.dim().trailing_zeros();
    if placement.len() != n as usize {
        return Err(Error::domain(format!(
            "placement covers {} qubits, distribution {n}",
            placement.len()
        )));
    }
    let mut w = dist.weights().to_vec();
    for (q, &p) in placement.iter().enumerate() {
        let cal = device
            .qubits
            .get(p)
            .ok_or_else(|| Error::domain(format!("qubit {p} not on device {}", device.name)))?;
        let mask = bit_of(n, q);
        for i0 in 0..w.len() {
            if i0 & mask != 0 {
                continue;
            }
            let i1 = i0 | mask;
            let (w0, w1) = (w[i0], w[i1]);
            w[i0] = (1.0 - cal.readout_p01) * w0 + cal.readout_p10 * w1;
            w[i1] = cal.readout_p01 * w0 + (1.0 - cal.readout_p10) * w1;
        }
    }
    Ok(MomentumDistribution::from_populations(w))
}

/// Shot counts per momentum bin, bins ordered by ascending momentum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotHistogram {
    pub counts: Vec<u64>,
}

impl ShotHistogram {
    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn count(&self, m: i64) -> Result<u64> {
        Ok(self.counts[index_of_momentum(m, self.counts.len())?])
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.shots() as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }
}

/// Multinomial draw by sequential conditional binomials, seeded ChaCha8.
pub fn sample_shots(dist: &MomentumDistribution, shots: u64, seed: u64) -> Result<ShotHistogram> {
    if shots == 0 {
        return Err(Error::domain("shots must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; dist.dim()];
    let mut remaining = shots;
    let mut mass = 1.0f64;
    let weights = dist.weights();
    for (i, &w) in weights.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == weights.len() - 1 {
            counts[i] = remaining;
            break;
        }
        let p = if mass > 0.0 { (w / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, p)
            .map_err(|e| Error::domain(e.to_string()))?
            .sample(&mut rng);
        counts[i] = draw;
        remaining -= draw;
        mass -= w;
    }
    Ok(ShotHistogram { counts })
}

/// One recorded step of a noisy run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    /// Readout-corrupted distribution before sampling.
    pub expected: MomentumDistribution,
    /// Mean relative frequencies over repetitions.
    pub distribution: MomentumDistribution,
    /// Standard error of each bin's mean frequency.
    pub stderr: Vec<f64>,
    pub peak: f64,
    pub peak_stderr: f64,
    pub visible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyRun {
    pub params: MapParams,
    pub device: String,
    pub m0: i64,
    pub t: usize,
    pub shots: u64,
    pub repetitions: u64,
    pub seed: u64,
    pub placement: Vec<usize>,
    pub swaps_per_step: Vec<usize>,
    pub per_step: Vec<StepRecord>,
}

impl NoisyRun {
    pub fn peaks(&self) -> Vec<f64> {
        self.per_step.iter().map(|s| s.peak).collect()
    }

    pub fn expected_peaks(&self) -> Vec<f64> {
        self.per_step
            .iter()
            .map(|s| s.expected.weight(self.m0).expect("m0 validated"))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub m0: i64,
    pub steps: usize,
    pub shots: u64,
    pub repetitions: u64,
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            m0: 0,
            steps: 1,
            shots: 8192,
            repetitions: 10,
            seed: 2021,
        }
    }
}

/// Routes one step, then evolves the density matrix continuously for
/// `steps` kicks. After each kick the readout-corrupted distribution is
/// recorded and sampled while the uncorrupted state keeps evolving.
/// Later steps continue from the previous step's final layout.
pub fn noisy_localization_run(params: &MapParams, device: &DeviceModel, opts: &RunOptions) -> Result<NoisyRun> {
    device.validate()?;
    if opts.shots == 0 || opts.repetitions == 0 {
        return Err(Error::domain("shots and repetitions must be at least 1"));
    }
    let b0 = index_of_momentum(opts.m0, params.dim)?;
    let step = build_step_circuit(params);
    let first = route_circuit(&step, device, RoutingObjective::MinSwaps)?;
    let mut segments = vec![first];
    for _ in 1..opts.steps {
        let from = readout_layout(segments.last().expect("nonempty"));
        segments.push(route_with_placement(&step, device, &from)?);
    }
    let placement = segments[0].placement.clone();
    let mut register: Vec<usize> = placement.clone();
    for s in &segments {
        register.extend(s.active_qubits());
    }
    register.sort_unstable();
    register.dedup();

    let model = NoiseModel::new(device, register.clone())?;
    let start = embed_logical_index(b0, &placement, &register)?;
    let mut dm = basis_dm(register.len() as u32, start);

    let mut per_step = Vec::with_capacity(opts.steps + 1);
    per_step.push(record_step(0, &dm, &placement, &register, device, opts)?);
    for (i, seg) in segments.iter().enumerate() {
        model.run(&mut dm, seg)?;
        per_step.push(record_step(i + 1, &dm, &readout_layout(seg), &register, device, opts)?);
    }
    Ok(NoisyRun {
        params: *params,
        device: device.name.clone(),
        m0: opts.m0,
        t: opts.steps,
        shots: opts.shots,
        repetitions: opts.repetitions,
        seed: opts.seed,
        placement,
        swaps_per_step: segments.iter().map(|s| s.swap_count).collect(),
        per_step,
    })
}

fn basis_dm(n: u32, b: usize) -> DensityMatrix {
    let dim = 1usize << n;
    let mut entries = vec![c(0.0); dim * dim];
    entries[b * dim + b] = c(1.0);
    DensityMatrix::from_raw(n, entries)
}

fn record_step(
    t: usize,
    dm: &DensityMatrix,
    layout: &[usize],
    register: &[usize],
    device: &DeviceModel,
    opts: &RunOptions,
) -> Result<StepRecord> {
    let ideal = logical_distribution(dm, layout, register)?;
    let expected = measure_readout(&ideal, device, layout)?;
    let dim = expected.dim();
    let peak_bin = index_of_momentum(opts.m0, dim)?;
    let reps = opts.repetitions as usize;

    let mut freqs = Vec::with_capacity(reps);
    for r in 0..opts.repetitions {
        let hist = sample_shots(&expected, opts.shots, derive(derive(opts.seed, t as u64), r))?;
        freqs.push(hist.frequencies());
    }
    let mean: Vec<f64> = (0..dim)
        .map(|i| freqs.iter().map(|f| f[i]).sum::<f64>() / reps as f64)
        .collect();
    let binomial_se = |p: f64| (p * (1.0 - p) / (opts.shots as f64 * reps as f64)).sqrt();
    let stderr: Vec<f64> = (0..dim)
        .map(|i| {
            if reps < 2 {
                binomial_se(mean[i])
            } else {
                let var = freqs.iter().map(|f| (f[i] - mean[i]).powi(2)).sum::<f64>() / (reps - 1) as f64;
                (var / reps as f64).sqrt()
            }
        })
        .collect();

    // peak contrast per repetition: W(m0) minus the mean of the other bins
    let contrast: Vec<f64> = freqs
        .iter()
        .map(|f| f[peak_bin] - (1.0 - f[peak_bin]) / (dim - 1) as f64)
        .collect();
    let mean_contrast = contrast.iter().sum::<f64>() / reps as f64;
    let contrast_se = if reps < 2 {
        binomial_se(mean[peak_bin]) * dim as f64 / (dim - 1) as f64
    } else {
        let var = contrast.iter().map(|x| (x - mean_contrast).powi(2)).sum::<f64>() / (reps - 1) as f64;
        (var / reps as f64).sqrt()
    };
    let visible = mean_contrast > 0.0 && mean_contrast >= 3.0 * contrast_se;

    Ok(StepRecord {
        t,
        expected,
        distribution: MomentumDistribution::from_populations(mean.clone()),
        peak: mean[peak_bin],
        peak_stderr: stderr[peak_bin],
        stderr,
        visible,
    })
}

/// Single device parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Err2q,
    Err1q,
    /// Multiplies every T1 and T2.
    T1t2Scale,
    Steps,
}

/// Copy of `device` with the axis parameter set to `value`. The `steps`
/// axis leaves the device untouched.
pub fn device_at(device: &DeviceModel, axis: SweepAxis, value: f64) -> Result<DeviceModel> {
    let mut d = device.clone();
    match axis {
        SweepAxis::Err2q => d.err_2q = value,
        SweepAxis::Err1q => d.err_1q = value,
        SweepAxis::T1t2Scale => {
            for q in d.qubits.iter_mut() {
                q.t1 *= value;
                q.t2 *= value;
            }
        }
        SweepAxis::Steps => {}
    }
    d.validate()?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::StateVector;

    #[test]
    fn channels_are_trace_preserving() {
        let chans = [
            NoiseChannel::depolarizing_1q(0.3).unwrap(),
            NoiseChannel::depolarizing_2q(0.7).unwrap(),
            NoiseChannel::thermal_relaxation(50.0, 70.0, 0.4).unwrap(),
            NoiseChannel::thermal_relaxation(50.0, 100.0, 3.0).unwrap(),
            NoiseChannel::readout_confusion(0.02, 0.05).unwrap(),
        ];
        for ch in chans {
            assert!(ch.completeness_error() < 1e-10, "{ch:?}");
        }
    }

    #[test]
    fn unphysical_relaxation_rejected() {
        assert!(matches!(
            NoiseChannel::thermal_relaxation(10.0, 25.0, 1.0),
            Err(Error::Physicality(_))
        ));
        assert!(NoiseChannel::depolarizing_1q(1.5).is_err());
    }

    #[test]
    fn full_depolarizing_gives_maximally_mixed() {
        let psi = StateVector::normalized(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let mut dm = DensityMatrix::from_pure(&psi);
        NoiseChannel::depolarizing_1q(1.0)
            .unwrap()
            .apply(&mut dm, &[0])
            .unwrap();
        let target = DensityMatrix::maximally_mixed(1);
        for (a, b) in dm.entries().iter().zip(target.entries()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn relaxation_decay_rates() {
        // |+> decays coherence at e^{-d/T2}, excited population at e^{-d/T1}
        let plus = StateVector::uniform(1);
        let mut dm = DensityMatrix::from_pure(&plus);
        let (t1, t2, d) = (40.0, 30.0, 5.0);
        NoiseChannel::thermal_relaxation(t1, t2, d)
            .unwrap()
            .apply(&mut dm, &[0])
            .unwrap();
        assert!((dm.entry(0, 1).re - 0.5 * (-d / t2).exp()).abs() < 1e-12);
        assert!((dm.entry(1, 1).re - 0.5 * (-d / t1).exp()).abs() < 1e-12);
    }

    #[test]
    fn readout_channel_diagonal_matches_confusion() {
        let ch = NoiseChannel::readout_confusion(0.1, 0.25).unwrap();
        let mut dm = DensityMatrix::from_pure(&StateVector::computational(1, 1).unwrap());
        ch.apply(&mut dm, &[0]).unwrap();
        assert!((dm.entry(0, 0).re - 0.25).abs() < 1e-15);
        assert!((dm.entry(1, 1).re - 0.75).abs() < 1e-15);
    }

    #[test]
    fn msb_readout_flip_moves_peak_to_bottom() {
        let mut dev = DeviceModel::ideal(3);
        dev.qubits[0].readout_p10 = 0.2;
        let delta = MomentumDistribution::delta(8, 0).unwrap();
        let out = measure_readout(&delta, &dev, &[0, 1, 2]).unwrap();
        assert!((out.weight(-4).unwrap() - 0.2).abs() < 1e-15);
        assert!((out.weight(0).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn symmetric_readout_fixes_uniform() {
        let mut dev = DeviceModel::ideal(3);
        for q in dev.qubits.iter_mut() {
            q.readout_p01 = 0.13;
            q.readout_p10 = 0.13;
        }
        let u = MomentumDistribution::uniform(8).unwrap();
        let out = measure_readout(&u, &dev, &[2, 0, 1]).unwrap();
        for w in out.weights() {
            assert!((w - 0.125).abs() < 1e-15);
        }
        let ideal = measure_readout(&u, &DeviceModel::ideal(3), &[0, 1, 2]).unwrap();
        assert_eq!(ideal, u);
    }

    #[test]
    fn delta_sampling_is_concentrated_and_deterministic() {
        let d = MomentumDistribution::delta(8, 2).unwrap();
        let h = sample_shots(&d, 1000, 5).unwrap();
        assert_eq!(h.count(2).unwrap(), 1000);
        let p = MomentumDistribution::new(vec![0.1, 0.2, 0.3, 0.05, 0.05, 0.1, 0.1, 0.1]).unwrap();
        assert_eq!(sample_shots(&p, 8192, 9).unwrap(), sample_shots(&p, 8192, 9).unwrap());
        assert_ne!(sample_shots(&p, 8192, 9).unwrap(), sample_shots(&p, 8192, 10).unwrap());
        assert_eq!(sample_shots(&p, 8192, 9).unwrap().shots(), 8192);
        assert!(sample_shots(&p, 0, 9).is_err());
    }

    #[test]
    fn sweep_axes_modify_the_right_field() {
        let lima = crate::device::fixture("lima").unwrap();
        assert_eq!(device_at(&lima, SweepAxis::Err2q, 0.05).unwrap().err_2q, 0.05);
        assert_eq!(device_at(&lima, SweepAxis::Err1q, 0.01).unwrap().err_1q, 0.01);
        let s = device_at(&lima, SweepAxis::T1t2Scale, 0.5).unwrap();
        assert_eq!(s.qubits[0].t1, lima.qubits[0].t1 * 0.5);
        assert!(device_at(&lima, SweepAxis::Err2q, 1.5).is_err());
    }
}
