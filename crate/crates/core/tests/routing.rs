//! Routing checked against an independent swap-schedule search and against
//! the unrouted circuit's action.

use std::collections::HashSet;

use num_complex::Complex64 as C64;

use sawtooth::circuit::{apply_circuit, build_qft, build_step_circuit, Circuit, Gate};
use sawtooth::device::{
    execution_time, fixture, fixtures, placements, route_circuit, route_with_placement, total_relative_error,
    DeviceModel, RoutingObjective,
};
use sawtooth::{MapParams, StateVector};

/// Fewest SWAPs that make `gates` executable from `layout`, searched by
/// iterative deepening with a memo of failed `(gate, layout, budget)` states.
fn min_swaps_dfs(gates: &[Gate], device: &DeviceModel, layout: &[usize], cap: usize) -> Option<usize> {
    fn feasible(
        gates: &[Gate],
        device: &DeviceModel,
        i: usize,
        layout: &mut Vec<usize>,
        budget: usize,
        dead: &mut HashSet<(usize, Vec<usize>, usize)>,
    ) -> bool {
        if i == gates.len() {
            return true;
        }
        let key = (i, layout.clone(), budget);
        if dead.contains(&key) {
            return false;
        }
        let runnable = match gates[i] {
            Gate::CP(a, b, _) | Gate::Swap(a, b) => device.adjacent(layout[a], layout[b]),
            _ => true,
        };
        if runnable && feasible(gates, device, i + 1, layout, budget, dead) {
            return true;
        }
        if budget > 0 {
            for [a, b] in device.coupling.clone() {
                let saved = layout.clone();
                for p in layout.iter_mut() {
                    if *p == a {
                        *p = b;
                    } else if *p == b {
                        *p = a;
                    }
                }
                let ok = *layout != saved && feasible(gates, device, i, layout, budget - 1, dead);
                *layout = saved;
                if ok {
                    return true;
                }
            }
        }
        dead.insert(key);
        false
    }
    let mut dead = HashSet::new();
    (0..=cap).find(|&s| feasible(gates, device, 0, &mut layout.to_vec(), s, &mut dead))
}

fn path_device(n: usize) -> DeviceModel {
    let mut d = DeviceModel::ideal(n);
    d.name = "path".into();
    d.coupling = (0..n - 1).map(|i| [i, i + 1]).collect();
    d
}

#[test]
fn swap_counts_match_exhaustive_search() {
    let step = build_step_circuit(&MapParams::standard());
    let mut devices = fixtures();
    devices.push(path_device(3));
    for dev in &devices {
        let routed = route_circuit(&step, dev, RoutingObjective::MinSwaps).unwrap();
        let oracle = placements(3, dev.num_qubits())
            .iter()
            .filter_map(|p| min_swaps_dfs(step.gates(), dev, p, 12))
            .min()
            .unwrap();
        assert_eq!(routed.swap_count, oracle, "{}", dev.name);
        // per placement too
        for p in placements(3, dev.num_qubits()).iter().take(12) {
            let a = route_with_placement(&step, dev, p).map(|r| r.swap_count).ok();
            assert_eq!(a, min_swaps_dfs(step.gates(), dev, p, 12), "{} {p:?}", dev.name);
        }
    }
}

/// Physical index of the register state whose logical-order index is `j`.
fn to_physical(j: usize, full_layout: &[usize]) -> usize {
    let n = full_layout.len();
    let mut idx = 0;
    for (wire, &p) in full_layout.iter().enumerate() {
        if j >> (n - 1 - wire) & 1 == 1 {
            idx |= 1 << (n - 1 - p);
        }
    }
    idx
}

fn check_routed_action(logical: &Circuit, dev: &DeviceModel, placement: &[usize]) {
    let routed = route_with_placement(logical, dev, placement).unwrap();
    let n = logical.n() as usize;
    let n_dev = dev.num_qubits();
    let full = routed.initial_full_layout();
    for b in 0..1usize << n {
        let ideal = apply_circuit(&StateVector::computational(n as u32, b).unwrap(), logical).unwrap();
        let input = to_physical(b << (n_dev - n), &full);
        let out = apply_circuit(
            &StateVector::computational(n_dev as u32, input).unwrap(),
            &routed.circuit,
        )
        .unwrap();
        for (j, amp) in out.amplitudes().iter().enumerate() {
            let expected = if j % (1 << (n_dev - n)) == 0 {
                ideal.amplitudes()[j >> (n_dev - n)]
            } else {
                C64::new(0.0, 0.0)
            };
            assert!(
                (amp - expected).norm() < 1e-10,
                "{} {placement:?} b={b} j={j}",
                dev.name
            );
        }
    }
}

#[test]
fn routed_circuits_act_like_the_logical_circuit() {
    let step = build_step_circuit(&MapParams::standard());
    for dev in fixtures() {
        let best = route_circuit(&step, &dev, RoutingObjective::MinSwaps).unwrap();
        check_routed_action(&step, &dev, &best.placement);
        check_routed_action(&step, &dev, &[4, 0, 2]);
    }
    check_routed_action(&build_qft(4, false), &path_device(4), &[3, 1, 0, 2]);
    let four = build_step_circuit(&MapParams::from_chaos(4, 3, 2.0).unwrap());
    check_routed_action(&four, &path_device(5), &[0, 2, 4, 1]);
}

#[test]
fn triangle_beats_every_path_placement() {
    let dev = fixture("yorktown").unwrap();
    let step = build_step_circuit(&MapParams::standard());
    let best = route_circuit(&step, &dev, RoutingObjective::MinSwaps).unwrap();
    assert_eq!(best.swap_count, 0);
    let best_time = execution_time(&best, &dev);
    let best_err = total_relative_error(&best, &dev, &best.final_layout).unwrap();
    let mut paths = 0;
    for p in placements(3, dev.num_qubits()) {
        let links = [(p[0], p[1]), (p[1], p[2]), (p[0], p[2])]
            .iter()
            .filter(|&&(a, b)| dev.adjacent(a, b))
            .count();
        if links == 3 {
            continue;
        }
        let Ok(r) = route_with_placement(&step, &dev, &p) else {
            continue;
        };
        paths += 1;
        assert!(r.swap_count >= 1);
        assert!(execution_time(&r, &dev) > best_time);
        assert!(total_relative_error(&r, &dev, &r.final_layout).unwrap() > best_err);
    }
    assert!(paths > 0);
}

#[test]
fn path_fixtures_need_swaps() {
    let step = build_step_circuit(&MapParams::standard());
    for name in ["lima", "belem", "quito", "santiago", "athens"] {
        let r = route_circuit(&step, &fixture(name).unwrap(), RoutingObjective::MinSwaps).unwrap();
        assert!(r.swap_count >= 1, "{name}");
    }
}

#[test]
fn min_time_never_slower_than_min_swaps() {
    let step = build_step_circuit(&MapParams::standard());
    for dev in fixtures() {
        let a = route_circuit(&step, &dev, RoutingObjective::MinSwaps).unwrap();
        let b = route_circuit(&step, &dev, RoutingObjective::MinTime).unwrap();
        assert!(
            execution_time(&b, &dev) <= execution_time(&a, &dev) + 1e-12,
            "{}",
            dev.name
        );
    }
}
