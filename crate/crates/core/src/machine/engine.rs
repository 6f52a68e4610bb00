use super::primitives::{decode_split, encode_split, split_children, SplitNode, SPLIT_HANDLER};
use super::result::{LaneCounters, PhaseRecord, SimResult};
use super::{map_vertex, MachineConfig, Task};
use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::ops::Range;

/// An event-driven program. The engine asks for phases until the program
/// declines; each phase runs until no events remain, and consecutive phases
/// are separated by a global barrier.
pub trait Program {
    /// Seeds the next phase. Returning `false` ends the run.
    fn next_phase(&mut self, phase: &mut PhaseCtx<'_>) -> Result<bool>;

    /// Executes one task on the lane described by `ctx`.
    fn handle(&mut self, ctx: &mut LaneCtx<'_>, task: Task) -> Result<()>;
}

const WAKE_SENDER: u32 = u32::MAX;
const HOST_SENDER: u32 = u32::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    time: u64,
    dest: u32,
    sender: u32,
    seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Fresh,
    Reply,
    Wake,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    key: Key,
    kind: Kind,
    task: Task,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.cmp(&self.key)
    }
}

#[derive(Debug, Clone, Copy)]
struct Outgoing {
    dest: u32,
    time: u64,
    kind: Kind,
    task: Task,
}

#[derive(Default)]
struct LaneState {
    fresh: VecDeque<Task>,
    replies: VecDeque<Task>,
    scheduled: bool,
    outstanding: u32,
}

/// Handle given to a task while it executes on a lane.
pub struct LaneCtx<'a> {
    config: &'a MachineConfig,
    lane: u32,
    handler: u16,
    start: u64,
    cycles: u64,
    free_threads: u32,
    out: &'a mut Vec<Outgoing>,
    edges: u64,
    messages: u64,
    dram_ops: u64,
    reads: u32,
}

impl<'a> LaneCtx<'a> {
    pub fn lane(&self) -> u32 {
        self.lane
    }

    pub fn node(&self) -> u32 {
        self.lane / self.config.lanes_per_node
    }

    pub fn config(&self) -> &MachineConfig {
        self.config
    }

    /// Current simulated time, including cycles charged so far.
    pub fn now(&self) -> u64 {
        self.start + self.cycles
    }

    pub fn charge(&mut self, cycles: u64) {
        self.cycles += cycles;
    }

    /// Counts logical edge work performed by this task.
    pub fn count_edges(&mut self, edges: u64) {
        self.edges += edges;
    }

    /// Hardware threads still available for new blocking DRAM reads.
    pub fn free_threads(&self) -> u32 {
        self.free_threads.saturating_sub(self.reads)
    }

    pub fn yield_thread(&mut self) {
        self.cycles += self.config.costs.thread_yield as u64;
    }

    pub fn dealloc_thread(&mut self) {
        self.cycles += self.config.costs.thread_dealloc as u64;
    }

    pub fn send(&mut self, to_lane: u32, task: Task) {
        debug_assert!(to_lane < self.config.total_lanes());
        self.cycles += self.config.costs.send_message as u64;
        self.messages += 1;
        let time = self.now() + self.config.message_cycles(self.lane, to_lane);
        self.out.push(Outgoing {
            dest: to_lane,
            time,
            kind: Kind::Fresh,
            task,
        });
    }

    /// Sends to the lane owning vertex `v`; returns that lane.
    pub fn send_to_vertex(&mut self, v: u64, task: Task) -> u32 {
        let lane = map_vertex(v, self.config).1;
        self.send(lane, task);
        lane
    }

    /// Reads `words` words stored with vertex `v`; `reply` runs on this lane
    /// when the data returns and occupies a hardware thread until then.
    pub fn dram_read(&mut self, v: u64, words: u32, reply: Task) -> Result<()> {
        let node = map_vertex(v, self.config).0;
        self.dram_read_node(node, words, reply)
    }

    /// Like [`dram_read`](Self::dram_read) for data homed on `node`.
    pub fn dram_read_node(&mut self, node: u32, words: u32, reply: Task) -> Result<()> {
        self.check_words(words)?;
        self.cycles += self.config.costs.dram_issue as u64;
        self.dram_ops += 1;
        self.reads += 1;
        let time = self.now() + self.dram_latency(node);
        self.out.push(Outgoing {
            dest: self.lane,
            time,
            kind: Kind::Reply,
            task: reply,
        });
        Ok(())
    }

    /// Issues one single-word read per vertex in `vs`; `reply` runs once,
    /// when the slowest of them has returned.
    pub fn dram_gather(&mut self, vs: &[u32], reply: Task) -> Result<()> {
        if vs.is_empty() {
            return Err(self.fault("empty gather"));
        }
        let mut latency = 0;
        for &v in vs {
            let node = map_vertex(v as u64, self.config).0;
            latency = latency.max(self.dram_latency(node));
            self.cycles += self.config.costs.dram_issue as u64;
            self.dram_ops += 1;
        }
        self.reads += 1;
        let time = self.now() + latency;
        self.out.push(Outgoing {
            dest: self.lane,
            time,
            kind: Kind::Reply,
            task: reply,
        });
        Ok(())
    }

    /// Non-blocking store of `words` words homed with vertex `v`.
    pub fn dram_write(&mut self, _v: u64, words: u32) -> Result<()> {
        self.check_words(words)?;
        self.cycles += self.config.costs.dram_issue as u64;
        self.dram_ops += 1;
        Ok(())
    }

    /// Round trip to DRAM on `node` from this lane.
    pub fn dram_latency(&self, node: u32) -> u64 {
        if node == self.node() {
            self.config.local_dram_cycles()
        } else {
            self.config.remote_dram_cycles()
        }
    }

    /// Starts a simulated `parallel_for` over `[start, end)` spread across
    /// `lanes`; each index runs `handler` with payload `[index, depth, arg, 0]`.
    pub fn spawn_parallel_for(
        &mut self,
        range: Range<u64>,
        lanes: Range<u32>,
        handler: u16,
        cost: u32,
        arg: u64,
    ) {
        if range.is_empty() {
            return;
        }
        let first = lanes.start;
        let task = encode_split(SplitNode {
            range,
            lanes,
            handler,
            cost,
            depth: 0,
            arg,
        });
        self.send(first, task);
    }

    /// Builds a simulation error tagged with this lane and handler.
    pub fn fault(&self, message: impl Into<String>) -> Error {
        Error::Simulation {
            lane: self.lane,
            handler: self.handler,
            message: message.into(),
        }
    }

    fn check_words(&self, words: u32) -> Result<()> {
        if (1..=8).contains(&words) {
            Ok(())
        } else {
            Err(self.fault(format!("DRAM access of {words} words (must be 1-8)")))
        }
    }
}

/// Handle used by a program to seed a phase.
pub struct PhaseCtx<'a> {
    config: &'a MachineConfig,
    index: usize,
    label: Option<String>,
    launches: Vec<(u32, Task)>,
}

impl<'a> PhaseCtx<'a> {
    pub fn config(&self) -> &MachineConfig {
        self.config
    }

    /// Zero-based index of the phase being seeded.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = Some(label.into());
    }

    /// Places `task` on `lane` at the start of the phase.
    pub fn launch(&mut self, lane: u32, task: Task) {
        self.launches.push((lane, task));
    }

    /// Seeds a `parallel_for` rooted at the first lane of `lanes`.
    pub fn parallel_for(
        &mut self,
        range: Range<u64>,
        lanes: Range<u32>,
        handler: u16,
        cost: u32,
        arg: u64,
    ) {
        if range.is_empty() || lanes.is_empty() {
            return;
        }
        let first = lanes.start;
        let task = encode_split(SplitNode {
            range,
            lanes,
            handler,
            cost,
            depth: 0,
            arg,
        });
        self.launch(first, task);
    }

    /// Runs `handler` once on every lane, index = lane id, via the spawn tree.
    pub fn broadcast(&mut self, handler: u16, cost: u32, arg: u64) {
        let lanes = self.config.total_lanes();
        self.parallel_for(0..lanes as u64, 0..lanes, handler, cost, arg);
    }
}

struct Engine<'a> {
    config: &'a MachineConfig,
    heap: BinaryHeap<Event>,
    lanes: Vec<LaneState>,
    counters: Vec<LaneCounters>,
    seq: u64,
    out: Vec<Outgoing>,
    horizon: u64,
}

impl<'a> Engine<'a> {
    fn push(&mut self, time: u64, dest: u32, sender: u32, kind: Kind, task: Task) {
        self.seq += 1;
        self.heap.push(Event {
            key: Key {
                time,
                dest,
                sender,
                seq: self.seq,
            },
            kind,
            task,
        });
    }

    fn run(&mut self, program: &mut dyn Program) -> Result<()> {
        while let Some(ev) = self.heap.pop() {
            let Key { time, dest, .. } = ev.key;
            let lane = dest as usize;
            match ev.kind {
                Kind::Fresh | Kind::Reply => {
                    let st = &mut self.lanes[lane];
                    if ev.kind == Kind::Fresh {
                        st.fresh.push_back(ev.task);
                    } else {
                        st.replies.push_back(ev.task);
                    }
                    if !st.scheduled {
                        st.scheduled = true;
                        self.push(time, dest, WAKE_SENDER, Kind::Wake, ev.task);
                    }
                }
                Kind::Wake => {
                    let hw = self.config.hw_threads_per_lane;
                    let st = &mut self.lanes[lane];
                    let next = if let Some(t) = st.replies.pop_front() {
                        st.outstanding -= 1;
                        Some(t)
                    } else if st.outstanding < hw {
                        st.fresh.pop_front()
                    } else {
                        None
                    };
                    match next {
                        Some(task) => {
                            let end = self.execute(program, dest, time, task)?;
                            self.horizon = self.horizon.max(end);
                            self.push(end, dest, WAKE_SENDER, Kind::Wake, task);
                        }
                        None => st.scheduled = false,
                    }
                }
            }
        }
        Ok(())
    }

    fn execute(
        &mut self,
        program: &mut dyn Program,
        lane: u32,
        time: u64,
        task: Task,
    ) -> Result<u64> {
        let st = &self.lanes[lane as usize];
        let free = self
            .config
            .hw_threads_per_lane
            .saturating_sub(st.outstanding);
        let mut out = std::mem::take(&mut self.out);
        let mut ctx = LaneCtx {
            config: self.config,
            lane,
            handler: task.handler,
            start: time,
            cycles: task.cost as u64,
            free_threads: free,
            out: &mut out,
            edges: 0,
            messages: 0,
            dram_ops: 0,
            reads: 0,
        };
        if task.handler == SPLIT_HANDLER {
            run_split(program, &mut ctx, task)?;
        } else {
            program.handle(&mut ctx, task)?;
        }
        let (cycles, edges, messages, dram_ops, reads) =
            (ctx.cycles, ctx.edges, ctx.messages, ctx.dram_ops, ctx.reads);
        self.lanes[lane as usize].outstanding += reads;
        let c = &mut self.counters[lane as usize];
        c.tasks_run += 1;
        c.edges_processed += edges;
        c.messages_sent += messages;
        c.dram_ops += dram_ops;
        c.busy_cycles += cycles;
        for o in out.drain(..) {
            self.push(o.time, o.dest, lane, o.kind, o.task);
        }
        self.out = out;
        Ok(time + cycles)
    }
}

fn run_split(program: &mut dyn Program, ctx: &mut LaneCtx<'_>, task: Task) -> Result<()> {
    let node = decode_split(&task);
    let n = node.range.end - node.range.start;
    if n == 0 {
        return Ok(());
    }
    if n == 1 {
        ctx.cycles += node.cost as u64;
        let body = Task::new(
            node.handler,
            node.cost,
            [node.range.start, node.depth as u64, node.arg, 0],
        );
        let saved = ctx.handler;
        ctx.handler = node.handler;
        let r = program.handle(ctx, body);
        ctx.handler = saved;
        return r;
    }
    let (left, right) = split_children(&node);
    ctx.cycles += ctx.config.costs.thread_create as u64 * 2;
    let (ll, rl) = (left.lanes.start, right.lanes.start);
    ctx.send(ll, encode_split(left));
    ctx.send(rl, encode_split(right));
    Ok(())
}

/// Runs `program` to completion on a machine described by `config`.
pub fn run_program(config: &MachineConfig, program: &mut dyn Program) -> Result<SimResult> {
    config.validate()?;
    let total = config.total_lanes() as usize;
    let mut engine = Engine {
        config,
        heap: BinaryHeap::new(),
        lanes: (0..total).map(|_| LaneState::default()).collect(),
        counters: vec![LaneCounters::default(); total],
        seq: 0,
        out: Vec::new(),
        horizon: 0,
    };
    let mut phases = Vec::new();
    let mut time = 0u64;
    loop {
        let mut pc = PhaseCtx {
            config,
            index: phases.len(),
            label: None,
            launches: Vec::new(),
        };
        if !program.next_phase(&mut pc)? {
            break;
        }
        let start = if phases.is_empty() {
            time
        } else {
            time + config.barrier_cycles()
        };
        let work_before: u64 = engine.counters.iter().map(|c| c.edges_processed).sum();
        for (lane, task) in pc.launches {
            if lane as usize >= total {
                return Err(Error::Simulation {
                    lane,
                    handler: task.handler,
                    message: format!("launch on lane {lane} of {total}"),
                });
            }
            engine.push(start, lane, HOST_SENDER, Kind::Fresh, task);
        }
        engine.horizon = start;
        engine.run(program)?;
        let end = engine.horizon;
        let work_after: u64 = engine.counters.iter().map(|c| c.edges_processed).sum();
        phases.push(PhaseRecord {
            label: pc.label.unwrap_or_else(|| format!("phase{}", phases.len())),
            start_cycle: time,
            cycles: end - time,
            work: work_after - work_before,
        });
        time = end;
    }
    Ok(SimResult::new(config, time, engine.counters, phases))
}
