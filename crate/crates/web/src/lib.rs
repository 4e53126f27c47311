//! Browser bindings for the sawtooth-map simulator.
//!
//! The `demo` functions are plain Rust so they can be tested natively; the
//! exported wrappers only convert errors into JS exceptions.

use wasm_bindgen::prelude::*;

pub mod demo {
    use sawtooth::analysis::second_moment;
    use sawtooth::classical::diffusion_experiment;
    use sawtooth::device::{fixture, fixtures};
    use sawtooth::exact::exact_evolve;
    use sawtooth::noise::{noisy_localization_run, RunOptions};
    use sawtooth::MapParams;

    /// Largest register the page will simulate exactly.
    pub const MAX_EXACT_QUBITS: u32 = 10;
    /// Density-matrix runs get expensive quickly; keep them small.
    pub const MAX_NOISY_QUBITS: u32 = 4;
    pub const MAX_STEPS: usize = 2000;

    fn params(n: u32, l: i64, chaos: f64, max_n: u32, steps: usize) -> Result<MapParams, String> {
        if n == 0 || n > max_n {
            return Err(format!("n must be between 1 and {max_n}"));
        }
        if steps > MAX_STEPS {
            return Err(format!("at most {MAX_STEPS} steps"));
        }
        MapParams::from_chaos(n, l, chaos).map_err(|e| e.to_string())
    }

    /// Momentum weights after `steps` kicks, ordered m = -N/2 .. N/2 - 1.
    pub fn distribution(n: u32, l: i64, chaos: f64, m0: i64, steps: usize) -> Result<Vec<f64>, String> {
        let p = params(n, l, chaos, MAX_EXACT_QUBITS, steps)?;
        let ev = exact_evolve(&p, m0, steps).map_err(|e| e.to_string())?;
        Ok(ev[steps].weights().to_vec())
    }

    /// W_t(m0) for t = 0..=steps. An empty device name means noiseless;
    /// otherwise the bundled device model of that name, without shot noise.
    pub fn peak_series(n: u32, l: i64, chaos: f64, m0: i64, steps: usize, device: &str) -> Result<Vec<f64>, String> {
        if device.is_empty() {
            let p = params(n, l, chaos, MAX_EXACT_QUBITS, steps)?;
            let ev = exact_evolve(&p, m0, steps).map_err(|e| e.to_string())?;
            return ev.iter().map(|d| d.weight(m0).map_err(|e| e.to_string())).collect();
        }
        let p = params(n, l, chaos, MAX_NOISY_QUBITS, steps)?;
        let dev = fixture(device).ok_or_else(|| format!("unknown device {device:?}"))?;
        let opts = RunOptions {
            m0,
            steps,
            shots: 1,
            repetitions: 1,
            ..Default::default()
        };
        let run = noisy_localization_run(&p, &dev, &opts).map_err(|e| e.to_string())?;
        Ok(run.expected_peaks())
    }

    /// Quantum second moment about m0 = 0 for t = 0..=steps.
    pub fn quantum_spread(n: u32, l: i64, chaos: f64, steps: usize) -> Result<Vec<f64>, String> {
        let p = params(n, l, chaos, MAX_EXACT_QUBITS, steps)?;
        exact_evolve(&p, 0, steps)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|d| second_moment(d, 0).map_err(|e| e.to_string()))
            .collect()
    }

    /// Classical ensemble second moment about m0 = 0 for t = 0..=steps.
    pub fn classical_spread(
        n: u32,
        l: i64,
        chaos: f64,
        steps: usize,
        trajectories: usize,
        seed: u64,
    ) -> Result<Vec<f64>, String> {
        let p = params(n, l, chaos, MAX_EXACT_QUBITS, steps)?;
        let run = diffusion_experiment(&p, 0.0, trajectories, steps, seed).map_err(|e| e.to_string())?;
        Ok(run.msd)
    }

    pub fn device_names() -> Vec<String> {
        fixtures().into_iter().map(|d| d.name).collect()
    }
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

// JS numbers: 32-bit integers cross the boundary as plain numbers, 64-bit ones as BigInt.

#[wasm_bindgen]
pub fn distribution(n: u32, l: i32, chaos: f64, m0: i32, steps: u32) -> Result<Vec<f64>, JsError> {
    demo::distribution(n, l.into(), chaos, m0.into(), steps as usize).map_err(js)
}

#[wasm_bindgen(js_name = peakSeries)]
pub fn peak_series(n: u32, l: i32, chaos: f64, m0: i32, steps: u32, device: &str) -> Result<Vec<f64>, JsError> {
    demo::peak_series(n, l.into(), chaos, m0.into(), steps as usize, device).map_err(js)
}

#[wasm_bindgen(js_name = quantumSpread)]
pub fn quantum_spread(n: u32, l: i32, chaos: f64, steps: u32) -> Result<Vec<f64>, JsError> {
    demo::quantum_spread(n, l.into(), chaos, steps as usize).map_err(js)
}

#[wasm_bindgen(js_name = classicalSpread)]
pub fn classical_spread(
    n: u32,
    l: i32,
    chaos: f64,
    steps: u32,
    trajectories: u32,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    demo::classical_spread(n, l.into(), chaos, steps as usize, trajectories as usize, seed.into()).map_err(js)
}

#[wasm_bindgen(js_name = deviceNames)]
pub fn device_names() -> Vec<String> {
    demo::device_names()
}
