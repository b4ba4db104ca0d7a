//! Queue-level age of information against closed forms and an independent
//! arrival/departure-time oracle.

use adaptnet_core::comms::bench::{fcfs_mm1_aoi, lcfs_s_mm1_aoi, simulate_mm1};
use adaptnet_core::comms::QueueDiscipline;
use adaptnet_core::rng::seeded;
use rand_distr::{Distribution, Exp};

/// Time-average age from time-ordered (delivery time, generation time)
/// pairs, starting from age zero at t = 0.
fn sawtooth_average(deliveries: &[(f64, f64)]) -> f64 {
    let (mut area, mut last_t, mut last_gen) = (0.0, 0.0, 0.0);
    for &(t, g) in deliveries {
        if g < last_gen {
            continue;
        }
        area += ((t - last_gen).powi(2) - (last_t - last_gen).powi(2)) / 2.0;
        last_t = t;
        last_gen = g;
    }
    area / last_t
}

fn arrivals_and_services(lambda: f64, mu: f64, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut r = seeded(seed);
    let (ia, sv) = (Exp::new(lambda).unwrap(), Exp::new(mu).unwrap());
    let mut t = 0.0;
    let a = (0..n)
        .map(|_| {
            t += ia.sample(&mut r);
            t
        })
        .collect();
    (a, (0..n).map(|_| sv.sample(&mut r)).collect())
}

/// FCFS through the Lindley recursion D_k = max(A_k, D_{k-1}) + S_k.
fn fcfs_oracle(lambda: f64, mu: f64, n: usize, seed: u64) -> f64 {
    let (a, s) = arrivals_and_services(lambda, mu, n, seed);
    let mut d = 0.0f64;
    let deliveries: Vec<(f64, f64)> = a
        .iter()
        .zip(&s)
        .map(|(&ak, &sk)| {
            d = d.max(ak) + sk;
            (d, ak)
        })
        .collect();
    sawtooth_average(&deliveries)
}

/// Preemptive LCFS: a packet is delivered only if it finishes before the
/// next arrival.
fn lcfs_s_oracle(lambda: f64, mu: f64, n: usize, seed: u64) -> f64 {
    let (a, s) = arrivals_and_services(lambda, mu, n, seed);
    let deliveries: Vec<(f64, f64)> = (0..n - 1)
        .filter(|&k| a[k] + s[k] < a[k + 1])
        .map(|k| (a[k] + s[k], a[k]))
        .collect();
    sawtooth_average(&deliveries)
}

#[test]
fn closed_forms() {
    assert!((fcfs_mm1_aoi(0.5, 1.0) - 3.5).abs() < 1e-12);
    assert!((lcfs_s_mm1_aoi(0.5, 1.0) - 3.0).abs() < 1e-12);
}

#[test]
fn oracle_agrees_with_closed_forms() {
    for &rho in &[0.3, 0.5, 0.8] {
        let f = fcfs_oracle(rho, 1.0, 200_000, 11);
        let l = lcfs_s_oracle(rho, 1.0, 200_000, 12);
        assert!((f / fcfs_mm1_aoi(rho, 1.0) - 1.0).abs() < 0.03, "FCFS rho {rho}: {f}");
        assert!((l / lcfs_s_mm1_aoi(rho, 1.0) - 1.0).abs() < 0.03, "LCFS-S rho {rho}: {l}");
    }
}

#[test]
fn simulator_agrees_with_oracle() {
    for &(lambda, seed) in &[(0.3, 1u64), (0.5, 2), (0.8, 3)] {
        let horizon = 200_000.0;
        let n = (lambda * horizon) as usize;
        for (d, oracle) in [
            (QueueDiscipline::Fcfs, fcfs_oracle(lambda, 1.0, n, 100 + seed)),
            (QueueDiscipline::LcfsS, lcfs_s_oracle(lambda, 1.0, n, 200 + seed)),
        ] {
            let sim = simulate_mm1(d, lambda, 1.0, horizon, seed).unwrap();
            assert!(
                (sim.avg_aoi / oracle - 1.0).abs() < 0.05,
                "{} at {lambda}: simulator {} oracle {oracle}",
                d.name(),
                sim.avg_aoi
            );
        }
    }
}

#[test]
fn preemption_helps_at_every_load() {
    for &rho in &[0.3, 0.5, 0.8] {
        let f = simulate_mm1(QueueDiscipline::Fcfs, rho, 1.0, 200_000.0, 5).unwrap();
        let l = simulate_mm1(QueueDiscipline::LcfsS, rho, 1.0, 200_000.0, 5).unwrap();
        assert!(l.avg_aoi < f.avg_aoi, "rho {rho}: {} vs {}", l.avg_aoi, f.avg_aoi);
        assert_eq!(f.dropped, 0);
        assert!(l.dropped > 0);
    }
}
