use serde::Serialize;

use super::Packet;
use crate::{Error, Result};

/// Sawtooth age process of one source as seen by the sink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AoiTracker {
    last_delivered_gen_time: f64,
    now: f64,
    /// seconds²
    age_integral: f64,
    /// Seconds integrated so far.
    horizon: f64,
}

impl AoiTracker {
    /// Tracker starting at `start` with age zero.
    pub fn new(start: f64) -> Self {
        AoiTracker {
            last_delivered_gen_time: start,
            now: start,
            age_integral: 0.0,
            horizon: 0.0,
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn inst_age(&self) -> f64 {
        self.now - self.last_delivered_gen_time
    }

    pub fn age_integral(&self) -> f64 {
        self.age_integral
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Time-average age so far; zero before any time has elapsed.
    pub fn average(&self) -> f64 {
        if self.horizon > 0.0 {
            self.age_integral / self.horizon
        } else {
            0.0
        }
    }

    /// Lets `dt` seconds pass without deliveries.
    pub fn advance(&mut self, dt: f64) {
        let a0 = self.inst_age();
        self.age_integral += a0 * dt + 0.5 * dt * dt;
        self.now += dt;
        self.horizon += dt;
    }

    /// Registers a delivery at the current time.
    pub fn deliver(&mut self, gen_time: f64) -> Result<()> {
        if gen_time > self.now + 1e-9 {
            return Err(Error::invalid("delivered packet was generated in the future"));
        }
        self.last_delivered_gen_time = self.last_delivered_gen_time.max(gen_time.min(self.now));
        Ok(())
    }
}

/// Integrates the age over `(now − dt, now]` and then applies `deliveries`
/// completed at `now`.
pub fn aoi_update(tracker: &mut AoiTracker, deliveries: &[Packet], now: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::invalid("AoI update needs dt > 0"));
    }
    if let Some(p) = deliveries.iter().find(|p| p.gen_time > now + 1e-9) {
        return Err(Error::invalid(alloc::format!(
            "packet {} delivered at {now} was generated at {}",
            p.id,
            p.gen_time
        )));
    }
    tracker.advance(dt);
    tracker.now = now;
    for p in deliveries {
        tracker.deliver(p.gen_time)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::RelevanceScore;

    fn pkt(gen: f64) -> Packet {
        Packet {
            id: 0,
            source_uav: 0,
            gen_time: gen,
            size_bits: 1.0,
            relevance: RelevanceScore::classify(0.0, 1.0),
        }
    }

    #[test]
    fn ramp_without_deliveries() {
        let mut t = AoiTracker::new(0.0);
        aoi_update(&mut t, &[], 2.0, 2.0).unwrap();
        let (a0, big_t) = (t.inst_age(), 3.0);
        let before = t.age_integral();
        aoi_update(&mut t, &[], 5.0, big_t).unwrap();
        assert_eq!(t.inst_age(), a0 + big_t);
        assert_eq!(t.age_integral() - before, a0 * big_t + big_t * big_t / 2.0);
    }

    #[test]
    fn fresh_delivery_resets_age() {
        let mut t = AoiTracker::new(0.0);
        aoi_update(&mut t, &[pkt(4.0)], 4.0, 4.0).unwrap();
        assert_eq!(t.inst_age(), 0.0);
        assert_eq!(t.average(), 2.0);
    }

    #[test]
    fn stale_delivery_never_raises_age() {
        let mut t = AoiTracker::new(0.0);
        aoi_update(&mut t, &[pkt(3.0)], 4.0, 4.0).unwrap();
        aoi_update(&mut t, &[pkt(1.0)], 5.0, 1.0).unwrap();
        assert_eq!(t.inst_age(), 2.0);
    }

    #[test]
    fn future_packets_are_rejected() {
        let mut t = AoiTracker::new(0.0);
        assert!(aoi_update(&mut t, &[pkt(9.0)], 1.0, 1.0).is_err());
        assert!(aoi_update(&mut t, &[], 1.0, 0.0).is_err());
    }
}
