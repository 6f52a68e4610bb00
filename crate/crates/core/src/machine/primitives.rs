//! The two parallel-for primitives.
//!
//! `parallel_for` is executed by the engine itself: a node of the spawn tree
//! is a task under the reserved [`SPLIT_HANDLER`] that either runs the body
//! for a single index or sends its two halves onward. `lb_split` computes the
//! worker assignment of the weight-aware variant; kernels simulate its spawn
//! tree with their own handlers.

use super::Task;
use std::ops::Range;

/// Handler id reserved for spawn-tree nodes.
pub const SPLIT_HANDLER: u16 = u16::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct SplitNode {
    pub range: Range<u64>,
    pub lanes: Range<u32>,
    pub handler: u16,
    pub cost: u32,
    pub depth: u16,
    pub arg: u64,
}

pub(crate) fn encode_split(n: SplitNode) -> Task {
    debug_assert!(n.range.end <= u32::MAX as u64);
    Task::new(
        SPLIT_HANDLER,
        0,
        [
            n.range.start | (n.range.end << 32),
            n.lanes.start as u64 | ((n.lanes.end as u64) << 32),
            n.handler as u64 | ((n.cost as u64) << 16) | ((n.depth as u64) << 48),
            n.arg,
        ],
    )
}

pub(crate) fn decode_split(t: &Task) -> SplitNode {
    let [w0, w1, w2, w3] = t.payload;
    SplitNode {
        range: (w0 & 0xffff_ffff)..(w0 >> 32),
        lanes: (w1 & 0xffff_ffff) as u32..(w1 >> 32) as u32,
        handler: (w2 & 0xffff) as u16,
        cost: ((w2 >> 16) & 0xffff_ffff) as u32,
        depth: (w2 >> 48) as u16,
        arg: w3,
    }
}

/// Gives the left child `ceil(W/2)` of the `W` lanes and the matching
/// fraction of the indices; with a single lane the range is halved.
pub(crate) fn split_children(n: &SplitNode) -> (SplitNode, SplitNode) {
    let count = n.range.end - n.range.start;
    let w = n.lanes.end - n.lanes.start;
    let (left_n, left_lanes, right_lanes) = if w <= 1 {
        (count.div_ceil(2), n.lanes.clone(), n.lanes.clone())
    } else {
        let lw = w.div_ceil(2);
        let cut = n.lanes.start + lw;
        (
            index_cut(count, lw, w),
            n.lanes.start..cut,
            cut..n.lanes.end,
        )
    };
    let mid = n.range.start + left_n;
    let child = |range, lanes| SplitNode {
        range,
        lanes,
        handler: n.handler,
        cost: n.cost,
        depth: n.depth + 1,
        arg: n.arg,
    };
    (
        child(n.range.start..mid, left_lanes),
        child(mid..n.range.end, right_lanes),
    )
}

/// Indices that go left when `lw` of `w` workers do: `round(n·lw/w)`,
/// leaving both sides nonempty.
fn index_cut(n: u64, lw: u32, w: u32) -> u64 {
    let x = ((n as u128 * lw as u128 * 2 + w as u128) / (2 * w as u128)) as u64;
    x.clamp(1, n - 1)
}

/// `round(workers · part / whole)` clamped to `[1, workers - 1]`.
fn proportional(workers: u32, part: f64, whole: f64) -> u32 {
    let x = (workers as f64 * part / whole).round() as u32;
    x.clamp(1, workers - 1)
}

/// One leaf of a load-balanced split: `worker` runs indices `start..end`.
/// When a single heavy index is shared by several workers, each gets one of
/// `parts` equal slices of its body, numbered by `part`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LbAssignment {
    pub worker: u32,
    pub start: usize,
    pub end: usize,
    pub part: u32,
    pub parts: u32,
    /// Depth of the leaf in the spawn tree.
    pub depth: u32,
}

/// Weight-aware recursive bisection of `0..weights.len()` over `workers`.
///
/// Each split cuts the index range where the left side holds about
/// `ceil(W/2)/W` of the weight and hands each half a share of the workers
/// proportional to its weight (at least one worker
/// for any half with positive weight). A weightless half runs on the first
/// worker of its parent. With all weights zero the split degrades to plain
/// index-count bisection. A single index holding several workers has its
/// body divided into `min(workers, ceil(weight / 8))` parts.
pub fn lb_split(weights: &[u64], workers: Range<u32>) -> Vec<LbAssignment> {
    let nodes = lb_tree(weights, workers);
    let mut out = Vec::new();
    if !nodes.is_empty() {
        flatten(&nodes, 0, &mut out);
    }
    out
}

fn flatten(nodes: &[LbNode], i: usize, out: &mut Vec<LbAssignment>) {
    out.extend_from_slice(&nodes[i].leaves);
    for &c in &nodes[i].children {
        flatten(nodes, c, out);
    }
}

/// A node of the load-balanced spawn tree. It runs on `worker` and either
/// spawns `children` or hands out `leaves`; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LbNode {
    pub worker: u32,
    pub children: Vec<usize>,
    pub leaves: Vec<LbAssignment>,
}

/// The spawn tree behind [`lb_split`].
pub fn lb_tree(weights: &[u64], workers: Range<u32>) -> Vec<LbNode> {
    let mut prefix = Vec::with_capacity(weights.len() + 1);
    let mut acc = 0u64;
    prefix.push(0);
    for &w in weights {
        acc += w;
        prefix.push(acc);
    }
    let mut nodes = Vec::new();
    if !weights.is_empty() && !workers.is_empty() {
        let uniform = acc == 0;
        lb_rec(&prefix, uniform, 0, weights.len(), workers, 0, &mut nodes);
    }
    nodes
}

fn lb_rec(
    prefix: &[u64],
    uniform: bool,
    s: usize,
    e: usize,
    workers: Range<u32>,
    depth: u32,
    nodes: &mut Vec<LbNode>,
) -> usize {
    let id = nodes.len();
    nodes.push(LbNode {
        worker: workers.start,
        children: Vec::new(),
        leaves: Vec::new(),
    });
    let w = workers.end - workers.start;
    let weight = |a: usize, b: usize| {
        if uniform {
            (b - a) as u64
        } else {
            prefix[b] - prefix[a]
        }
    };
    let leaf = |worker: u32, part: u32, parts: u32| LbAssignment {
        worker,
        start: s,
        end: e,
        part,
        parts,
        depth,
    };
    if w == 1 {
        nodes[id].leaves.push(leaf(workers.start, 0, 1));
        return id;
    }
    if e - s == 1 {
        let parts = (weight(s, e).div_ceil(8) as u32).clamp(1, w);
        for part in 0..parts {
            let worker = workers.start + (part as u64 * w as u64 / parts as u64) as u32;
            nodes[id].leaves.push(leaf(worker, part, parts));
        }
        return id;
    }
    let total = weight(s, e);
    if total == 0 {
        // Nothing to balance here.
        nodes[id].leaves.push(leaf(workers.start, 0, 1));
        return id;
    }
    // Cut where the left side carries the share of the weight that its
    // ceil(W/2) workers should take.
    let lw = w.div_ceil(2);
    let m = if uniform {
        s + index_cut((e - s) as u64, lw, w) as usize
    } else {
        // Nearest cut to the target, ties going right, as `index_cut` rounds.
        let goal = total as u128 * lw as u128;
        let scaled = |m: usize| (prefix[m] - prefix[s]) as u128 * w as u128;
        let hi = prefix[s + 1..=e]
            .partition_point(|&p| ((p - prefix[s]) as u128 * w as u128) < goal)
            + s
            + 1;
        let lo = hi - 1;
        let m = if hi > e || (lo > s && goal - scaled(lo) < scaled(hi) - goal) {
            lo
        } else {
            hi
        };
        m.clamp(s + 1, e - 1)
    };
    let (wl, wr) = (weight(s, m), weight(m, e));
    let (left, right) = if wl == 0 {
        (workers.start..workers.start + 1, workers.clone())
    } else if wr == 0 {
        (workers.clone(), workers.start..workers.start + 1)
    } else {
        let cut = workers.start + proportional(w, wl as f64, total as f64);
        (workers.start..cut, cut..workers.end)
    };
    let l = lb_rec(prefix, uniform, s, m, left, depth + 1, nodes);
    let r = lb_rec(prefix, uniform, m, e, right, depth + 1, nodes);
    nodes[id].children = vec![l, r];
    id
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Worker of every index under plain bisection, replayed from `split_children`.
    fn plain_assignment(n: u64, lanes: u32) -> Vec<u32> {
        let mut owner = vec![u32::MAX; n as usize];
        let mut stack = vec![SplitNode {
            range: 0..n,
            lanes: 0..lanes,
            handler: 0,
            cost: 0,
            depth: 0,
            arg: 0,
        }];
        while let Some(node) = stack.pop() {
            let count = node.range.end - node.range.start;
            if count == 0 {
                continue;
            }
            if node.lanes.end - node.lanes.start == 1 || count == 1 {
                for i in node.range.clone() {
                    owner[i as usize] = node.lanes.start;
                }
                continue;
            }
            let (l, r) = split_children(&node);
            stack.push(l);
            stack.push(r);
        }
        owner
    }

    fn lb_owner(weights: &[u64], workers: u32) -> Vec<u32> {
        let mut owner = vec![u32::MAX; weights.len()];
        for a in lb_split(weights, 0..workers) {
            for i in a.start..a.end {
                if a.part == 0 {
                    owner[i] = a.worker;
                }
            }
        }
        owner
    }

    #[test]
    fn split_encoding_round_trips() {
        let node = SplitNode {
            range: 5..123_456,
            lanes: 7..4096,
            handler: 12,
            cost: 70_000,
            depth: 9,
            arg: u64::MAX - 3,
        };
        assert_eq!(decode_split(&encode_split(node.clone())), node);
    }

    #[test]
    fn index_per_lane_maps_to_that_lane() {
        assert_eq!(plain_assignment(64, 64), (0..64).collect::<Vec<_>>());
        assert_eq!(plain_assignment(37, 37), (0..37).collect::<Vec<_>>());
    }

    #[test]
    fn weights_three_to_one() {
        let a = lb_split(&[3, 1], 0..4);
        assert_eq!(a.len(), 2);
        // Index 0 gets workers 0..3 and splits its body; index 1 gets worker 3.
        let idx1: Vec<_> = a.iter().filter(|x| x.start == 1).collect();
        assert_eq!(idx1.len(), 1);
        assert_eq!(idx1[0].worker, 3);
        assert!(a.iter().filter(|x| x.start == 0).all(|x| x.worker < 3));
    }

    #[test]
    fn uniform_weights_match_plain_split() {
        for (n, w) in [(100usize, 8u32), (64, 64), (1000, 37), (5, 5), (17, 3)] {
            let weights = vec![4u64; n];
            assert_eq!(
                lb_owner(&weights, w),
                plain_assignment(n as u64, w),
                "n={n} w={w}"
            );
            let zeros = vec![0u64; n];
            assert_eq!(
                lb_owner(&zeros, w),
                plain_assignment(n as u64, w),
                "zero n={n} w={w}"
            );
        }
    }

    #[test]
    fn every_index_is_covered_exactly_once() {
        let weights: Vec<u64> = (0..500).map(|i| (i * 7919 % 97) as u64).collect();
        let a = lb_split(&weights, 0..32);
        let mut cover = vec![0u32; 500];
        for x in &a {
            for i in x.start..x.end {
                if x.part == 0 {
                    cover[i] += 1;
                }
            }
        }
        assert!(cover.iter().all(|&c| c == 1));
    }

    #[test]
    fn skewed_weights_are_balanced() {
        let mut weights = vec![1u64; 1000];
        weights[500] = 9000;
        let total: u64 = weights.iter().sum();
        let workers = 64;
        let mut load = vec![0f64; workers as usize];
        for a in lb_split(&weights, 0..workers) {
            let w: u64 = weights[a.start..a.end].iter().sum();
            load[a.worker as usize] += w as f64 / a.parts as f64;
        }
        let max = load.iter().cloned().fold(0.0, f64::max);
        assert!(max <= 1.5 * total as f64 / workers as f64, "max load {max}");
    }
}
