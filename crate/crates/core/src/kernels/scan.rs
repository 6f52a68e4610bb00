//! Per-lane adjacency scanning shared by the kernels.
//!
//! A lane keeps a queue of work and runs at most `limit` scanner threads
//! over it. A scanner reads a unit's offsets, then fetches neighbor ids
//! eight at a time. A slice is walked either in order by one thread, which
//! lets the kernel stop early, or fanned out so that every chunk becomes a
//! queued read any free thread can take.

use crate::error::Result;
use crate::machine::{LaneCtx, Task};
use std::collections::VecDeque;

pub(crate) const CHUNK: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ScanItem {
    pub unit: u32,
    /// Adjacency positions `lo..hi` of `unit`.
    pub lo: u32,
    pub hi: u32,
    /// Kernel-defined meaning.
    pub mode: u32,
}

impl ScanItem {
    pub fn payload(&self, pos: u32) -> [u64; 4] {
        [
            self.unit as u64,
            self.lo as u64 | ((self.hi as u64) << 32),
            pos as u64,
            self.mode as u64,
        ]
    }

    /// Item and current position from a scanner payload.
    pub fn decode(p: &[u64; 4]) -> (ScanItem, u32) {
        (
            ScanItem {
                unit: p[0] as u32,
                lo: (p[1] & 0xffff_ffff) as u32,
                hi: (p[1] >> 32) as u32,
                mode: p[3] as u32,
            },
            p[2] as u32,
        )
    }

    /// End of the chunk starting at `pos`.
    pub fn chunk_end(&self, pos: u32) -> u32 {
        (pos + CHUNK).min(self.hi)
    }
}

#[derive(Debug, Clone, Copy)]
enum Work {
    Offsets(ScanItem),
    Chunk(ScanItem, u32),
}

pub(crate) struct Scanners {
    queues: Vec<VecDeque<Work>>,
    running: Vec<u32>,
    limit: u32,
    pub h_offsets: u16,
    pub h_chunk: u16,
    pub reply_cost: u32,
}

impl Scanners {
    pub fn new(lanes: usize, limit: u32, h_offsets: u16, h_chunk: u16, reply_cost: u32) -> Self {
        Scanners {
            queues: (0..lanes).map(|_| VecDeque::new()).collect(),
            running: vec![0; lanes],
            limit: limit.max(1),
            h_offsets,
            h_chunk,
            reply_cost,
        }
    }

    pub fn enqueue(&mut self, lane: u32, item: ScanItem) {
        self.queues[lane as usize].push_back(Work::Offsets(item));
    }

    pub fn is_idle(&self) -> bool {
        self.running.iter().all(|&r| r == 0) && self.queues.iter().all(|q| q.is_empty())
    }

    /// Starts scanner threads on the current lane while work and threads
    /// are available.
    pub fn pump(&mut self, ctx: &mut LaneCtx<'_>) -> Result<()> {
        let lane = ctx.lane() as usize;
        while self.running[lane] < self.limit && ctx.free_threads() > 0 {
            let Some(work) = self.queues[lane].pop_front() else {
                break;
            };
            self.running[lane] += 1;
            self.start(ctx, work)?;
        }
        Ok(())
    }

    fn start(&self, ctx: &mut LaneCtx<'_>, work: Work) -> Result<()> {
        match work {
            Work::Offsets(item) => self.read_offsets(ctx, item),
            Work::Chunk(item, pos) => self.read_chunk(ctx, item, pos),
        }
    }

    fn read_offsets(&self, ctx: &mut LaneCtx<'_>, item: ScanItem) -> Result<()> {
        ctx.dram_read(
            item.unit as u64,
            2,
            Task::new(self.h_offsets, self.reply_cost, item.payload(item.lo)),
        )
    }

    /// Fetches the chunk of neighbor ids starting at `pos`.
    pub fn read_chunk(&self, ctx: &mut LaneCtx<'_>, item: ScanItem, pos: u32) -> Result<()> {
        let words = item.chunk_end(pos) - pos;
        ctx.dram_read(
            item.unit as u64,
            words,
            Task::new(self.h_chunk, self.reply_cost, item.payload(pos)),
        )
    }

    /// Handles an offsets reply: start on the first chunk or move on.
    pub fn on_offsets(&mut self, ctx: &mut LaneCtx<'_>, payload: &[u64; 4]) -> Result<()> {
        let (item, _) = ScanItem::decode(payload);
        if item.lo >= item.hi {
            self.next(ctx)
        } else {
            self.read_chunk(ctx, item, item.lo)
        }
    }

    /// Handles an offsets reply by queueing every chunk of the slice ahead of
    /// other work; this thread takes the first one and idle threads the rest.
    /// Each chunk's handler should finish with [`next`](Self::next).
    pub fn fan_out(&mut self, ctx: &mut LaneCtx<'_>, payload: &[u64; 4]) -> Result<()> {
        let (item, _) = ScanItem::decode(payload);
        if item.lo >= item.hi {
            return self.next(ctx);
        }
        let queue = &mut self.queues[ctx.lane() as usize];
        let mut pos = item.hi - 1 - (item.hi - 1 - item.lo) % CHUNK;
        while pos > item.lo {
            queue.push_front(Work::Chunk(item, pos));
            pos -= CHUNK;
        }
        self.read_chunk(ctx, item, item.lo)?;
        self.pump(ctx)
    }

    /// Number of chunks in the slice.
    pub fn chunk_count(item: &ScanItem) -> u32 {
        (item.hi - item.lo.min(item.hi)).div_ceil(CHUNK)
    }

    /// After the chunk at `pos` is consumed: fetch the following chunk, or
    /// take the next queued slice.
    pub fn advance(&mut self, ctx: &mut LaneCtx<'_>, item: ScanItem, pos: u32) -> Result<()> {
        let next = pos + CHUNK;
        if next < item.hi {
            self.read_chunk(ctx, item, next)
        } else {
            self.next(ctx)
        }
    }

    /// The current scanner finished its slice.
    pub fn next(&mut self, ctx: &mut LaneCtx<'_>) -> Result<()> {
        let lane = ctx.lane() as usize;
        match self.queues[lane].pop_front() {
            Some(work) => self.start(ctx, work),
            None => {
                self.running[lane] -= 1;
                ctx.dealloc_thread();
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payload_round_trip() {
        let item = ScanItem {
            unit: 77,
            lo: 3,
            hi: 4_000_000,
            mode: 2,
        };
        assert_eq!(ScanItem::decode(&item.payload(11)), (item, 11));
        assert_eq!(item.chunk_end(3), 11);
        let short = ScanItem { hi: 5, ..item };
        assert_eq!(short.chunk_end(3), 5);
    }
}
