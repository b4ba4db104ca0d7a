use alloc::vec::Vec;

use rand::Rng;

/// Fixed-capacity ring of transitions with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    entries: Vec<T>,
    cursor: usize,
}

impl<T> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            entries: Vec::with_capacity(capacity.min(4096)),
            cursor: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Stores `item`, overwriting the oldest entry once full.
    pub fn push(&mut self, item: T) {
        if self.entries.len() < self.capacity {
            self.entries.push(item);
        } else {
            self.entries[self.cursor] = item;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// `n` entries drawn uniformly with replacement; empty when nothing is stored.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<&T> {
        if self.entries.is_empty() {
            return Vec::new();
        }
        (0..n)
            .map(|_| &self.entries[rng.random_range(0..self.entries.len())])
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.entries.iter()
    }
}
