//! Event-driven M/M/1 status-update queue for AoI benchmarking.
//!
//! Service is modeled as unit-rate transmission of packets whose sizes are
//! exponential with mean `1/mu`, which makes service times memoryless and
//! lets the same [`PacketQueue`] drive both the stepped simulator and this
//! continuous-time benchmark.

use rand_distr::{Distribution, Exp, Uniform};
use serde::Serialize;

use super::{AoiTracker, Packet, PacketQueue, QueueDiscipline};
use crate::rng;
use crate::trajectory::RelevanceScore;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mm1Result {
    pub discipline: QueueDiscipline,
    pub lambda: f64,
    pub mu: f64,
    pub horizon: f64,
    pub avg_aoi: f64,
    pub delivered: u64,
    pub dropped: u64,
}

/// Simulates `horizon` seconds of Poisson(`lambda`) arrivals served at rate
/// `mu` under `discipline`. PRIORITY packets carry relevance distances drawn
/// uniformly from [0, 1).
pub fn simulate_mm1(discipline: QueueDiscipline, lambda: f64, mu: f64, horizon: f64, seed: u64) -> Result<Mm1Result> {
    if !(lambda > 0.0 && mu > 0.0 && horizon > 0.0) {
        return Err(Error::invalid("M/M/1 benchmark needs positive rates and horizon"));
    }
    let inter = Exp::new(lambda).map_err(|_| Error::invalid("bad arrival rate"))?;
    let size = Exp::new(mu).map_err(|_| Error::invalid("bad service rate"))?;
    let relevance = Uniform::new(0.0, 1.0).map_err(|_| Error::invalid("bad relevance range"))?;
    let mut arrivals = rng::substream(seed, 1);
    let mut sizes = rng::substream(seed, 2);
    let mut scores = rng::substream(seed, 3);

    let mut queue = PacketQueue::new(discipline);
    let mut aoi = AoiTracker::new(0.0);
    let mut t = 0.0;
    let mut next_arrival = inter.sample(&mut arrivals);
    let mut next_id = 0u64;
    let mut delivered = 0u64;
    loop {
        queue.pull_next(t);
        let completion = queue.time_to_completion(1.0).map_or(f64::INFINITY, |d| t + d);
        let next = next_arrival.min(completion).min(horizon);
        let dt = next - t;
        let (done, _) = queue.serve_bits(dt, next, |_| true);
        aoi.advance(dt);
        for p in &done {
            aoi.deliver(p.gen_time)?;
        }
        delivered += done.len() as u64;
        t = next;
        if t >= horizon {
            break;
        }
        if next_arrival <= t {
            let packet = Packet {
                id: next_id,
                source_uav: 0,
                gen_time: t,
                size_bits: size.sample(&mut sizes),
                relevance: RelevanceScore::classify(relevance.sample(&mut scores), 0.5),
            };
            next_id += 1;
            queue.enqueue(packet, t);
            next_arrival = t + inter.sample(&mut arrivals);
        }
    }
    Ok(Mm1Result {
        discipline,
        lambda,
        mu,
        horizon,
        avg_aoi: aoi.average(),
        delivered,
        dropped: queue.dropped(),
    })
}

/// Closed-form average AoI of M/M/1 FCFS: `(1/mu)(1 + 1/rho + rho²/(1 − rho))`.
pub fn fcfs_mm1_aoi(lambda: f64, mu: f64) -> f64 {
    let rho = lambda / mu;
    (1.0 + 1.0 / rho + rho * rho / (1.0 - rho)) / mu
}

/// Closed-form average AoI of M/M/1 with preemption in service: `1/lambda + 1/mu`.
pub fn lcfs_s_mm1_aoi(lambda: f64, mu: f64) -> f64 {
    1.0 / lambda + 1.0 / mu
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_at_half_load() {
        assert!((fcfs_mm1_aoi(0.5, 1.0) - 3.5).abs() < 1e-12);
        assert!((lcfs_s_mm1_aoi(0.5, 1.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn short_runs_are_deterministic_and_close() {
        let a = simulate_mm1(QueueDiscipline::Fcfs, 0.5, 1.0, 2.0e4, 3).unwrap();
        let b = simulate_mm1(QueueDiscipline::Fcfs, 0.5, 1.0, 2.0e4, 3).unwrap();
        assert_eq!(a, b);
        assert!((a.avg_aoi - 3.5).abs() / 3.5 < 0.1, "{}", a.avg_aoi);
        assert_eq!(a.dropped, 0);
    }

    #[test]
    fn preemptive_disciplines_drop() {
        let s = simulate_mm1(QueueDiscipline::LcfsS, 0.8, 1.0, 1.0e4, 1).unwrap();
        let w = simulate_mm1(QueueDiscipline::LcfsW, 0.8, 1.0, 1.0e4, 1).unwrap();
        assert!(s.dropped > 0 && w.dropped > 0);
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(simulate_mm1(QueueDiscipline::Fcfs, 0.0, 1.0, 10.0, 0).is_err());
    }
}
