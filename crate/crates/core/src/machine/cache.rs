//! Direct-mapped software cache held in a lane's scratchpad, used to merge
//! pushed updates before they are written back.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    /// First use of an empty slot.
    ColdMiss,
    /// The slot held another key, which was evicted.
    ConflictMiss {
        penalty_cycles: u64,
    },
}

#[derive(Debug, Clone)]
pub struct SoftwareCache {
    slots: Vec<u64>,
    occupancy: usize,
    conflict_penalty_cycles: u64,
    pub hits: u64,
    pub misses: u64,
    pub conflicts: u64,
}

const EMPTY: u64 = u64::MAX;

/// Bytes per cache entry: a key and a value word.
pub const ENTRY_BYTES: u64 = 16;

impl SoftwareCache {
    pub fn new(capacity_entries: usize, conflict_penalty_cycles: u64) -> Self {
        SoftwareCache {
            slots: vec![EMPTY; capacity_entries.max(1)],
            occupancy: 0,
            conflict_penalty_cycles,
            hits: 0,
            misses: 0,
            conflicts: 0,
        }
    }

    /// Cache sized to a scratchpad of `scratchpad_bytes`.
    pub fn for_scratchpad(scratchpad_bytes: u64, conflict_penalty_cycles: u64) -> Self {
        Self::new(
            (scratchpad_bytes / ENTRY_BYTES) as usize,
            conflict_penalty_cycles,
        )
    }

    pub fn capacity_entries(&self) -> usize {
        self.slots.len()
    }

    pub fn occupancy(&self) -> usize {
        self.occupancy
    }

    pub fn touch(&mut self, key: u64) -> CacheOutcome {
        debug_assert_ne!(key, EMPTY);
        let slot = (key % self.slots.len() as u64) as usize;
        let cur = self.slots[slot];
        if cur == key {
            self.hits += 1;
            return CacheOutcome::Hit;
        }
        self.misses += 1;
        self.slots[slot] = key;
        if cur == EMPTY {
            self.occupancy += 1;
            CacheOutcome::ColdMiss
        } else {
            self.conflicts += 1;
            CacheOutcome::ConflictMiss {
                penalty_cycles: self.conflict_penalty_cycles,
            }
        }
    }

    /// Empties the cache, returning how many entries were resident.
    pub fn flush(&mut self) -> usize {
        let n = self.occupancy;
        self.slots.fill(EMPTY);
        self.occupancy = 0;
        n
    }
}
