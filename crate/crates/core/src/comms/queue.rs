use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::{success_factor, Packet, QueueDiscipline, Waveform};

#[derive(Debug, Clone, PartialEq)]
struct InService {
    packet: Packet,
    served_bits: f64,
}

/// Single-server queue. Preempted or replaced packets are discarded, not
/// resumed.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketQueue {
    discipline: QueueDiscipline,
    in_service: Option<InService>,
    waiting: VecDeque<Packet>,
    dropped: u64,
    /// Blend between relevance (1.0) and freshness (0.0) when a PRIORITY
    /// queue picks its next packet.
    priority_weight: f64,
}

/// Result of serving a queue for one interval.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ServeOutcome {
    pub delivered: Vec<Packet>,
    /// joules
    pub energy: f64,
    pub bits: f64,
}

const COMPLETION_TOLERANCE: f64 = 1e-9;

impl PacketQueue {
    pub fn new(discipline: QueueDiscipline) -> Self {
        PacketQueue {
            discipline,
            in_service: None,
            waiting: VecDeque::new(),
            dropped: 0,
            priority_weight: 1.0,
        }
    }

    pub fn discipline(&self) -> QueueDiscipline {
        self.discipline
    }

    /// Packets in service plus waiting.
    pub fn len(&self) -> usize {
        self.waiting.len() + usize::from(self.in_service.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    pub fn in_service(&self) -> Option<&Packet> {
        self.in_service.as_ref().map(|s| &s.packet)
    }

    pub fn waiting(&self) -> impl Iterator<Item = &Packet> {
        self.waiting.iter()
    }

    /// Packet that will be served next: the one in service, else the next
    /// waiting packet.
    pub fn head(&self) -> Option<&Packet> {
        self.in_service().or_else(|| self.waiting.front())
    }

    pub fn set_priority_weight(&mut self, w: f64) {
        self.priority_weight = w.clamp(0.0, 1.0);
    }

    pub fn enqueue(&mut self, packet: Packet, now: f64) {
        debug_assert!(packet.gen_time <= now, "packet generated in the future");
        match self.discipline {
            QueueDiscipline::Fcfs => {
                if self.in_service.is_none() {
                    self.start(packet);
                } else {
                    self.waiting.push_back(packet);
                }
            }
            QueueDiscipline::LcfsS => {
                if self.in_service.take().is_some() {
                    self.dropped += 1;
                }
                self.start(packet);
            }
            QueueDiscipline::LcfsW => {
                if self.in_service.is_none() {
                    self.start(packet);
                } else {
                    self.dropped += self.waiting.len() as u64;
                    self.waiting.clear();
                    self.waiting.push_back(packet);
                }
            }
            QueueDiscipline::Priority => {
                if self.in_service.is_none() {
                    self.start(packet);
                } else {
                    let pos = self
                        .waiting
                        .iter()
                        .position(|w| ranks_before(&packet, w))
                        .unwrap_or(self.waiting.len());
                    self.waiting.insert(pos, packet);
                }
            }
        }
    }

    fn start(&mut self, packet: Packet) {
        self.in_service = Some(InService {
            packet,
            served_bits: 0.0,
        });
    }

    pub(crate) fn pull_next(&mut self, now: f64) {
        if self.in_service.is_some() || self.waiting.is_empty() {
            return;
        }
        let idx = if self.discipline == QueueDiscipline::Priority && self.priority_weight < 1.0 {
            self.blended_choice(now)
        } else {
            0
        };
        if let Some(p) = self.waiting.remove(idx) {
            self.start(p);
        }
    }

    fn blended_choice(&self, now: f64) -> usize {
        let w = self.priority_weight;
        let max_d = self
            .waiting
            .iter()
            .map(|p| p.relevance.distance)
            .filter(|d| d.is_finite())
            .fold(0.0f64, f64::max);
        let mut best = 0;
        let mut best_key = f64::NEG_INFINITY;
        for (i, p) in self.waiting.iter().enumerate() {
            let rel = if !p.relevance.distance.is_finite() {
                1.0
            } else if max_d > 0.0 {
                p.relevance.distance / max_d
            } else {
                0.0
            };
            let fresh = 1.0 / (1.0 + (now - p.gen_time).max(0.0));
            let key = w * rel + (1.0 - w) * fresh;
            if key > best_key {
                best_key = key;
                best = i;
            }
        }
        best
    }

    /// Serves up to `capacity_bits`, moving on to following packets while
    /// `continue_with` accepts them. Returns delivered packets and bits sent.
    pub(crate) fn serve_bits(
        &mut self,
        capacity_bits: f64,
        now: f64,
        continue_with: impl Fn(&Packet) -> bool,
    ) -> (Vec<Packet>, f64) {
        let mut delivered = Vec::new();
        let mut remaining = capacity_bits.max(0.0);
        let mut sent = 0.0;
        let mut first = true;
        loop {
            self.pull_next(now);
            let Some(cur) = self.in_service.as_mut() else { break };
            if !first && !continue_with(&cur.packet) {
                break;
            }
            first = false;
            let need = (cur.packet.size_bits - cur.served_bits).max(0.0);
            if need <= remaining + COMPLETION_TOLERANCE * cur.packet.size_bits.max(1.0) {
                remaining = (remaining - need).max(0.0);
                sent += need;
                let done = self.in_service.take().expect("in service");
                delivered.push(done.packet);
            } else {
                cur.served_bits += remaining;
                sent += remaining;
                break;
            }
        }
        (delivered, sent)
    }

    /// Time until the packet in service completes at `rate`.
    pub(crate) fn time_to_completion(&self, rate: f64) -> Option<f64> {
        self.in_service
            .as_ref()
            .map(|s| (s.packet.size_bits - s.served_bits).max(0.0) / rate)
    }
}

/// PRIORITY order: larger distance first, earlier generation on ties.
fn ranks_before(a: &Packet, b: &Packet) -> bool {
    a.relevance.distance > b.relevance.distance
        || (a.relevance.distance == b.relevance.distance && a.gen_time < b.gen_time)
}

/// Serves the queue for `dt` seconds on `waveform` at channel quality `snr`.
///
/// The head-of-line packet receives `rate·dt·success_factor(snr)` bits, with
/// leftover capacity passed to the next packet. Energy is `power·dt` when the
/// queue had anything to send, zero when idle.
pub fn serve_step(
    queue: &mut PacketQueue,
    waveform: &Waveform,
    snr: f64,
    snr_floor: f64,
    snr_ref: f64,
    dt: f64,
    now: f64,
) -> ServeOutcome {
    if queue.is_empty() {
        return ServeOutcome::default();
    }
    let capacity = waveform.rate * dt * success_factor(snr, snr_floor, snr_ref);
    let (delivered, bits) = queue.serve_bits(capacity, now, |_| true);
    ServeOutcome {
        delivered,
        energy: waveform.power * dt,
        bits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comms::WaveformKind;
    use crate::trajectory::RelevanceScore;

    fn pkt(id: u64, gen: f64, distance: f64) -> Packet {
        Packet {
            id,
            source_uav: 0,
            gen_time: gen,
            size_bits: 1000.0,
            relevance: RelevanceScore::classify(distance, 10.0),
        }
    }

    fn ids(q: &PacketQueue) -> (Option<u64>, alloc::vec::Vec<u64>) {
        (q.in_service().map(|p| p.id), q.waiting().map(|p| p.id).collect())
    }

    #[test]
    fn fcfs_serves_first_arrival() {
        let mut q = PacketQueue::new(QueueDiscipline::Fcfs);
        q.enqueue(pkt(1, 0.0, 0.0), 0.0);
        assert_eq!(ids(&q), (Some(1), alloc::vec![]));
        q.enqueue(pkt(2, 0.1, 0.0), 0.1);
        q.enqueue(pkt(3, 0.2, 0.0), 0.2);
        assert_eq!(ids(&q), (Some(1), alloc::vec![2, 3]));
    }

    #[test]
    fn lcfs_s_preempts_service() {
        let mut q = PacketQueue::new(QueueDiscipline::LcfsS);
        q.enqueue(pkt(1, 0.0, 0.0), 0.0);
        q.enqueue(pkt(2, 0.5, 0.0), 0.5);
        assert_eq!(ids(&q), (Some(2), alloc::vec![]));
        assert_eq!(q.dropped(), 1);
    }

    #[test]
    fn lcfs_w_replaces_only_waiting() {
        let mut q = PacketQueue::new(QueueDiscipline::LcfsW);
        q.enqueue(pkt(1, 0.0, 0.0), 0.0);
        q.enqueue(pkt(2, 0.1, 0.0), 0.1);
        q.enqueue(pkt(3, 0.2, 0.0), 0.2);
        assert_eq!(ids(&q), (Some(1), alloc::vec![3]));
        assert_eq!(q.dropped(), 1);
    }

    #[test]
    fn priority_orders_by_distance_then_age() {
        let mut q = PacketQueue::new(QueueDiscipline::Priority);
        q.enqueue(pkt(1, 0.0, 1.0), 0.0);
        q.enqueue(pkt(2, 0.1, 5.0), 0.1);
        q.enqueue(pkt(3, 0.2, 50.0), 0.2);
        q.enqueue(pkt(4, 0.3, 5.0), 0.3);
        q.enqueue(pkt(5, 0.05, 5.0), 0.4);
        assert_eq!(ids(&q), (Some(1), alloc::vec![3, 5, 2, 4]));
    }

    #[test]
    fn blended_priority_prefers_fresh_packets_at_zero_weight() {
        let mut q = PacketQueue::new(QueueDiscipline::Priority);
        q.enqueue(pkt(1, 0.0, 1.0), 0.0);
        q.enqueue(pkt(2, 0.1, 50.0), 0.1);
        q.enqueue(pkt(3, 3.0, 1.0), 3.0);
        q.set_priority_weight(0.0);
        q.serve_bits(1000.0, 3.0, |_| false);
        assert_eq!(q.in_service().map(|p| p.id), Some(3));
    }

    fn wf(rate: f64, power: f64) -> Waveform {
        Waveform {
            kind: WaveformKind::EnergySaving,
            rate,
            power,
        }
    }

    #[test]
    fn exact_capacity_delivers_in_one_step() {
        let mut q = PacketQueue::new(QueueDiscipline::Fcfs);
        q.enqueue(pkt(1, 0.0, 0.0), 0.0);
        let out = serve_step(&mut q, &wf(2000.0, 4.0), 20.0, 0.0, 20.0, 0.5, 0.5);
        assert_eq!(out.delivered.len(), 1);
        assert_eq!(out.energy, 2.0);
        assert!(q.is_empty());
    }

    #[test]
    fn idle_queue_costs_nothing() {
        let mut q = PacketQueue::new(QueueDiscipline::Fcfs);
        let out = serve_step(&mut q, &wf(2000.0, 4.0), 20.0, 0.0, 20.0, 0.5, 0.0);
        assert_eq!(out, ServeOutcome::default());
    }

    #[test]
    fn halved_success_factor_doubles_steps() {
        let steps_for = |snr: f64| {
            let mut q = PacketQueue::new(QueueDiscipline::Fcfs);
            let mut p = pkt(1, 0.0, 0.0);
            p.size_bits = 3000.0;
            q.enqueue(p, 0.0);
            let mut n = 0;
            while !q.is_empty() {
                n += 1;
                serve_step(&mut q, &wf(2000.0, 4.0), snr, 0.0, 20.0, 0.5, n as f64 * 0.5);
                assert!(n < 100);
            }
            n
        };
        // 3000 bits at 1000 bits/step is 3 steps, at 500 bits/step 6
        assert_eq!(steps_for(20.0), 3);
        assert_eq!(steps_for(10.0), 6);
    }

    #[test]
    fn leftover_capacity_flows_to_next_packet() {
        let mut q = PacketQueue::new(QueueDiscipline::Fcfs);
        q.enqueue(pkt(1, 0.0, 0.0), 0.0);
        q.enqueue(pkt(2, 0.0, 0.0), 0.0);
        let out = serve_step(&mut q, &wf(4000.0, 4.0), 20.0, 0.0, 20.0, 0.5, 0.5);
        assert_eq!(out.delivered.len(), 2);
        assert_eq!(out.bits, 2000.0);
    }
}
