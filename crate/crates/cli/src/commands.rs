use crate::config::{set, FileConfig};
use crate::output::Recorder;
use crate::{
    CharacterizeArgs, FitArgs, GenArgs, InvariantViolation, NetsimArgs, ProfileArgs, ProjectArgs, ReportArgs,
    RunArgs,
};
use anyhow::{bail, Context, Result};
use finegraph_core::graph::{self, io as gio, split_vertices};
use finegraph_core::kernels::{
    l1_distance, power_iteration_oracle, run_bfs, run_pagerank, seq_bfs_oracle, seq_data_driven_pagerank,
    BfsVariant, FrontierStat, GraphView, KernelKind, PrVariant, UNREACHED,
};
use finegraph_core::network::{
    build_topology, compute_routes, saturation_bandwidth, simulate, stats_report, Injection, NetStats, TopologySpec,
};
use finegraph_core::profiler::{profile_bfs, profile_pr};
use finegraph_core::projection::{
    characterize_workload, fit_work_rate, measure_workload, read_samples, sweep, write_projection_csv,
    write_samples, ProjectionRow, SweepOptions, WorkRateModel, WorkRateSample,
    WorkloadCharacterization,
};
use finegraph_core::{GeneratorParams, MachineConfig, SimResult};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

fn label_of(path: &Path) -> String {
    path.file_stem().map_or("graph".into(), |s| s.to_string_lossy().into_owned())
}

fn to_bytes<F>(f: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut Vec<u8>) -> finegraph_core::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn gen(a: &GenArgs, file: &FileConfig) -> Result<()> {
    let mut p: GeneratorParams = file.gen.clone();
    set(&mut p.family, a.family);
    set(&mut p.scale, a.scale);
    set(&mut p.seed, a.seed);
    set(&mut p.er_avg_degree, a.er_avg_degree);
    set(&mut p.rmat_avg_degree, a.rmat_avg_degree);
    set(&mut p.ff_p_burn, a.ff_p_burn);
    let mut g = graph::generate(&p)?;
    if a.connected_only {
        g = g.restrict_to_connected().0;
    }
    let text = matches!(
        a.out.extension().and_then(|e| e.to_str()),
        Some("txt" | "el" | "edges")
    );
    let bytes = to_bytes(|b| if text { gio::write_edge_list(&g, b) } else { gio::write_binary(&g, b) })?;
    let mut rec = Recorder::new("gen");
    rec.config(&serde_json::json!({ "generator": p, "connected_only": a.connected_only }))?;
    rec.seed(p.seed);
    rec.output(&a.out, bytes);
    rec.finish()
}

/// Result document of `run`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutput {
    pub manifest: String,
    pub kernel: String,
    pub graph: String,
    pub family: String,
    pub scale: u32,
    pub nodes: u32,
    pub lanes: u32,
    pub split_size: Option<u64>,
    pub gteps: f64,
    pub effective_gteps: Option<f64>,
    pub edges_traversed: u64,
    /// Work credited to the run when forming work-rate samples.
    pub work: u64,
    pub iterations: Option<usize>,
    pub capped: Option<bool>,
    pub source: Option<u32>,
    pub distance: Option<Vec<u32>>,
    pub frontiers: Option<Vec<FrontierStat>>,
    pub scores: Option<Vec<f64>>,
    pub sim: SimResult,
}

pub fn run(a: &RunArgs, file: &FileConfig) -> Result<()> {
    let g = gio::load(&a.graph).with_context(|| format!("reading {}", a.graph.display()))?;
    let mut machine: MachineConfig = match &a.machine {
        Some(p) => MachineConfig::load(p)?,
        None => file.machine.clone(),
    };
    if let Some(total) = a.lanes {
        let m = MachineConfig::for_total_lanes(total);
        machine.node_count = m.node_count;
        machine.lanes_per_node = m.lanes_per_node;
    }
    set(&mut machine.node_count, a.nodes);
    set(&mut machine.lanes_per_node, a.lanes_per_node);
    machine.validate()?;

    let split = match a.split_size {
        Some(s) => Some(split_vertices(&g, s)?),
        None => None,
    };
    let view: GraphView<'_> = match &split {
        Some(s) => s.into(),
        None => (&g).into(),
    };
    let graph_label = label_of(&a.graph);
    let family = a.family.clone().unwrap_or_else(|| guess_family(&a.graph));
    let mut out = RunOutput {
        manifest: crate::output::manifest_path(&a.out).display().to_string(),
        kernel: a.kernel.name().into(),
        graph: graph_label.clone(),
        family: family.clone(),
        scale: g.scale(),
        nodes: machine.node_count,
        lanes: machine.total_lanes(),
        split_size: a.split_size,
        gteps: 0.0,
        effective_gteps: None,
        edges_traversed: 0,
        work: 0,
        iterations: None,
        capped: None,
        source: None,
        distance: None,
        frontiers: None,
        scores: None,
        sim: SimResult::default(),
    };
    let mut config = serde_json::json!({ "machine": machine, "kernel": a.kernel.name(), "split_size": a.split_size });
    let mut problems = Vec::new();
    let counted;
    if a.kernel.is_bfs() {
        let mut opts = file.bfs.clone();
        set(&mut opts.source, a.source);
        set(&mut opts.switch_fraction, a.switch_fraction);
        set(&mut opts.counting, a.counting);
        let variant = match a.kernel {
            KernelKind::PushBfs => BfsVariant::Push,
            KernelKind::PushPullBfs => BfsVariant::PushPull,
            _ => BfsVariant::LbPush,
        };
        config["bfs"] = serde_json::to_value(&opts)?;
        let r = run_bfs(view, &machine, variant, &opts)?;
        let reached = r.distance.iter().filter(|&&d| d != UNREACHED).count() as u64;
        if a.verify && r.distance != seq_bfs_oracle(&g, opts.source) {
            problems.push("BFS distances differ from the sequential oracle".to_string());
        }
        if r.distance.get(opts.source as usize) != Some(&0) {
            problems.push("source distance is not 0".into());
        }
        counted = r.counted_edges;
        out.gteps = r.gteps;
        out.edges_traversed = r.edges_traversed;
        out.work = r.edges_traversed + reached;
        out.source = Some(opts.source);
        out.frontiers = Some(r.frontiers);
        out.distance = (!a.no_vectors).then_some(r.distance);
        out.sim = r.sim;
    } else {
        let mut opts = file.pagerank.clone();
        if a.tol.is_some() {
            opts.tol = a.tol;
        }
        if a.max_iters.is_some() {
            opts.max_iters = a.max_iters;
        }
        set(&mut opts.alpha, a.alpha);
        let variant = if a.kernel == KernelKind::PushPr { PrVariant::Push } else { PrVariant::DataDriven };
        config["pagerank"] = serde_json::to_value(&opts)?;
        let r = run_pagerank(view, &machine, variant, &opts)?;
        let sum: f64 = r.scores.iter().sum();
        if !r.scores.is_empty() && (sum - 1.0).abs() > 1e-9 {
            problems.push(format!("scores sum to {sum}, not 1"));
        }
        if a.verify {
            match variant {
                PrVariant::Push => {
                    let max = opts.max_iters.unwrap_or(1000);
                    let (want, _) = power_iteration_oracle(&g, opts.alpha, r.tol, max);
                    let d = l1_distance(&r.scores, &want);
                    if d > 1e-6 {
                        problems.push(format!("push scores are {d:e} (L1) from the power-iteration oracle"));
                    }
                }
                PrVariant::DataDriven if split.is_none() => {
                    let max = opts.max_iters.unwrap_or(5);
                    let seq = seq_data_driven_pagerank(&g, opts.alpha, r.tol, max);
                    if seq.volumes != r.active_volumes {
                        problems.push("active volumes differ from the sequential data-driven run".into());
                    }
                }
                PrVariant::DataDriven => {}
            }
        }
        counted = r.edges_traversed;
        out.gteps = r.gteps;
        out.effective_gteps = r.effective_gteps;
        out.edges_traversed = r.edges_traversed;
        out.work = match variant {
            PrVariant::Push => r.edges_traversed,
            PrVariant::DataDriven => r.edges_traversed + r.active_counts.iter().sum::<u64>(),
        };
        out.iterations = Some(r.iterations);
        out.capped = Some(r.capped);
        out.scores = (!a.no_vectors).then_some(r.scores);
        out.sim = r.sim;
    }
    let implied = out.gteps * out.sim.elapsed_seconds * 1e9;
    if out.sim.elapsed_seconds > 0.0 && (implied - counted as f64).abs() > 1e-6 * counted.max(1) as f64 {
        problems.push(format!("GTEPS implies {implied} edges but {counted} were counted"));
    }

    let mut rec = Recorder::new("run");
    rec.config(&config)?;
    rec.input(&a.graph);
    rec.output(&a.out, serde_json::to_vec_pretty(&out)?);
    if let Some(p) = &a.phases {
        rec.output(p, to_bytes(|b| out.sim.write_phase_csv(b, true))?);
    }
    if let Some(p) = &a.samples {
        let mut samples = if p.exists() {
            read_samples(std::fs::File::open(p).map_err(finegraph_core::Error::from).with_context(|| format!("reading {}", p.display()))?)?
        } else {
            Vec::new()
        };
        let s = WorkRateSample::from_run(a.kernel.name(), &family, &out.sim, out.work)?;
        samples.push(s);
        rec.output(p, to_bytes(|b| write_samples(b, &samples))?);
    }
    rec.finish()?;
    if !problems.is_empty() {
        return Err(InvariantViolation(problems.join("; ")).into());
    }
    eprintln!(
        "{} on {}: {:.4} GTEPS over {:.3e} s simulated",
        out.kernel, graph_label, out.gteps, out.sim.elapsed_seconds
    );
    Ok(())
}

/// Family recorded by `gen` in the graph's manifest, else "custom".
fn guess_family(graph: &Path) -> String {
    let Ok(text) = std::fs::read_to_string(crate::output::manifest_path(graph)) else {
        return "custom".into();
    };
    serde_json::from_str::<serde_json::Value>(&text)
        .ok()
        .and_then(|v| v["config"]["generator"]["family"].as_str().map(String::from))
        .unwrap_or_else(|| "custom".into())
}

pub fn profile(a: &ProfileArgs, file: &FileConfig) -> Result<()> {
    let g = gio::load(&a.graph).with_context(|| format!("reading {}", a.graph.display()))?;
    let alpha = a.alpha.unwrap_or(file.pagerank.alpha);
    let tol = a.tol.or(file.pagerank.tol).unwrap_or(1.0 / g.vertex_count().max(1) as f64);
    let prof = match a.algorithm {
        k if k.is_bfs() => profile_bfs(&g, a.source.unwrap_or(file.bfs.source))?,
        KernelKind::PushPr => profile_pr(&g, alpha, tol, PrVariant::Push, a.max_iters.unwrap_or(1000))?,
        _ => profile_pr(&g, alpha, tol, PrVariant::DataDriven, a.max_iters.unwrap_or(1000))?,
    }
    .with_graph(label_of(&a.graph));
    let mut rec = Recorder::new("profile");
    rec.config(&serde_json::json!({ "algorithm": a.algorithm.name(), "alpha": alpha, "tol": tol }))?;
    rec.input(&a.graph);
    rec.output(&a.out, to_bytes(|b| prof.write_csv(b, true))?);
    rec.finish()?;
    eprintln!("peak {} ops over {} steps", prof.peak(), prof.ops.len());
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct FitOutput {
    model: WorkRateModel,
    samples: usize,
    monotone: bool,
    algorithms: Vec<String>,
}

pub fn fit(a: &FitArgs) -> Result<()> {
    let all = read_samples(std::fs::File::open(&a.samples).map_err(finegraph_core::Error::from).with_context(|| format!("reading {}", a.samples.display()))?)?;
    let samples: Vec<WorkRateSample> = all
        .into_iter()
        .filter(|s| a.algorithm.as_ref().is_none_or(|k| s.algorithm == k.name()))
        .filter(|s| a.family.as_ref().is_none_or(|f| &s.family == f))
        .collect();
    let model = fit_work_rate(&samples)?;
    let mut algorithms: Vec<String> = samples.iter().map(|s| s.algorithm.clone()).collect();
    algorithms.sort();
    algorithms.dedup();
    let out = FitOutput {
        model,
        samples: samples.len(),
        monotone: model.is_monotone(),
        algorithms,
    };
    let mut rec = Recorder::new("fit");
    rec.config(&serde_json::json!({ "algorithm": a.algorithm.map(|k| k.name()), "family": a.family }))?;
    rec.input(&a.samples);
    rec.output(&a.out, serde_json::to_vec_pretty(&out)?);
    rec.finish()?;
    eprintln!(
        "c = {:.4e}, x0 = {:.4e}, k = {:.4}, cutoff = {:.4e}, rms = {:.3e}{}",
        model.c,
        model.x0,
        model.k,
        model.rate_cutoff,
        model.residual_rms,
        if model.is_monotone() { "" } else { " (k > 1: rate falls past the knee)" }
    );
    Ok(())
}

fn read_model(path: &Path) -> Result<WorkRateModel> {
    let text = std::fs::read_to_string(path).map_err(finegraph_core::Error::from).with_context(|| format!("reading {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(finegraph_core::Error::from)?;
    let m = if v.get("model").is_some() { &v["model"] } else { &v };
    Ok(serde_json::from_value(m.clone()).map_err(finegraph_core::Error::from)?)
}

fn read_workload(path: &Path) -> Result<WorkloadCharacterization> {
    let text = std::fs::read_to_string(path).map_err(finegraph_core::Error::from).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text).map_err(finegraph_core::Error::from)?)
}

pub fn characterize(a: &CharacterizeArgs, file: &FileConfig) -> Result<()> {
    let mut measure = file.measure.clone();
    if a.tol.is_some() {
        measure.tol = a.tol;
    }
    let mut rec = Recorder::new("characterize");
    let mut measured = Vec::new();
    for &scale in &a.scales {
        for seed in a.seed..a.seed + a.seeds as u64 {
            let mut p = file.gen.clone();
            p.family = a.family;
            p.scale = scale;
            p.seed = seed;
            rec.seed(seed);
            let g = graph::generate(&p)?;
            measured.push(measure_workload(&g, a.kernel, &measure)?);
        }
    }
    let wc = characterize_workload(a.kernel.name(), a.family.label(), &measured)?;
    rec.config(&serde_json::json!({ "family": a.family, "kernel": a.kernel.name(), "scales": a.scales, "measure": measure, "generator": file.gen }))?;
    rec.output(&a.out, serde_json::to_vec_pretty(&wc)?);
    if let Some(p) = &a.measurements {
        rec.output(p, serde_json::to_vec_pretty(&measured)?);
    }
    rec.finish()
}

pub fn project(a: &ProjectArgs, file: &FileConfig) -> Result<()> {
    let model = read_model(&a.model)?;
    let workload = read_workload(&a.workload)?;
    let original = a.original.as_deref().map(read_workload).transpose()?;
    let mut sys = file.system.clone();
    set(&mut sys.split_size, a.split_size);
    set(&mut sys.lanes_per_node, a.lanes_per_node);
    if let Some(ns) = a.dram_roundtrip_ns {
        sys.dram_roundtrip_s = ns * 1e-9;
    }
    set(&mut sys.dram_bytes_per_node, a.dram_bytes_per_node);
    let bracket = a.bracket.unwrap_or_default();
    let rows = sweep(
        &model,
        &workload,
        &sys,
        &a.nodes,
        &a.scales,
        &SweepOptions {
            original: original.as_ref(),
            bracket,
        },
    )?;
    if !model.is_monotone() {
        eprintln!("warning: fitted k = {:.3} > 1, so the capped rate is not monotone in work", model.k);
    }
    let mut rec = Recorder::new("project");
    rec.config(&serde_json::json!({ "system": sys, "bracket": bracket, "nodes": a.nodes, "scales": a.scales }))?;
    rec.input(&a.model);
    rec.input(&a.workload);
    if let Some(o) = &a.original {
        rec.input(o);
    }
    rec.output(&a.out, to_bytes(|b| write_projection_csv(b, &rows))?);
    rec.finish()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NetsimOutput {
    pub manifest: String,
    pub saturation_bandwidth: f64,
    pub p50_ns: Option<u32>,
    pub p99_ns: Option<u32>,
    pub max_ns: Option<u32>,
    pub p99_over_no_load: Option<f64>,
    pub stats: NetStats,
}

pub fn netsim(a: &NetsimArgs, file: &FileConfig) -> Result<()> {
    let spec = match &a.topology {
        Some(path) => TopologySpec::File {
            path: path.clone(),
            radix: a.radix,
        },
        None => TopologySpec::Synthetic {
            router_count: a.routers,
            radix: a.radix.unwrap_or(14),
            node_count: a.compute_nodes,
            seed: a.topology_seed,
        },
    };
    let mut cfg = file.net.clone();
    set(&mut cfg.duration_ns, a.duration_ns);
    set(&mut cfg.link_bandwidth, a.link_bandwidth);
    set(&mut cfg.node_bandwidth, a.node_bandwidth);
    set(&mut cfg.seed, a.seed);
    set(&mut cfg.hop_cap, a.hop_cap);
    if a.drain {
        cfg.drain = true;
    }
    if let Some(inj) = &a.injection {
        cfg.injection = match inj.as_str() {
            "max" => Injection::MaxRate,
            f => Injection::Fraction(
                f.parse()
                    .map_err(|_| finegraph_core::Error::Parameter(format!("injection '{f}' is neither 'max' nor a fraction")))?,
            ),
        };
    }
    let t = build_topology(&spec)?;
    let routes = compute_routes(&t)?;
    let stats = simulate(&t, &routes, &cfg)?;
    let sat = saturation_bandwidth(&t, &routes, &cfg);
    let out = NetsimOutput {
        manifest: crate::output::manifest_path(&a.out_dir.join("netstats.json"))
            .display()
            .to_string(),
        saturation_bandwidth: sat,
        p50_ns: stats.latency.percentile(0.5),
        p99_ns: stats.latency.percentile(0.99),
        max_ns: stats.latency.max(),
        p99_over_no_load: stats.p99_ratio(),
        stats,
    };
    let s = &out.stats;
    let mut report = stats_report(s);
    let _ = writeln!(report, "\nsaturating link bandwidth {sat:.1} B/ns");
    let mut rec = Recorder::new("netsim");
    rec.config(&serde_json::json!({ "topology": spec, "net": cfg }))?;
    rec.seed(cfg.seed);
    if let Some(p) = &a.topology {
        rec.input(p);
    }
    rec.output(&a.out_dir.join("queue.csv"), to_bytes(|b| s.write_queue_csv(b))?);
    rec.output(&a.out_dir.join("latency_ccdf.csv"), to_bytes(|b| s.write_ccdf_csv(b))?);
    rec.output(&a.out_dir.join("report.txt"), report.into_bytes());
    rec.output(&a.out_dir.join("netstats.json"), serde_json::to_vec_pretty(&out)?);
    rec.finish()?;
    let mut problems = Vec::new();
    if s.conservation_violations > 0 {
        problems.push(format!("{} samples broke message conservation", s.conservation_violations));
    }
    if s.latency_bound_violations > 0 {
        problems.push(format!("{} deliveries beat the hop latency bound", s.latency_bound_violations));
    }
    if s.max_router_link_bytes_per_ns as f64 > cfg.link_bandwidth {
        problems.push("a router link exceeded its per-ns byte budget".into());
    }
    if !problems.is_empty() {
        return Err(InvariantViolation(problems.join("; ")).into());
    }
    eprintln!(
        "delivered {} of {} messages, p99 {} ns",
        s.delivered,
        s.injected,
        out.p99_ns.map_or("-".into(), |p| p.to_string())
    );
    Ok(())
}

fn display_kernel(name: &str) -> &str {
    match name {
        "push_pr" => "Push PR",
        "dd_pr" => "Data-driven PR",
        "push_bfs" => "Push BFS",
        "push_pull_bfs" => "Push-pull BFS",
        "lb_push_bfs" => "LB push BFS",
        o => o,
    }
}

pub fn report(a: &ReportArgs) -> Result<()> {
    let mut md = String::new();
    let mut rec = Recorder::new("report");
    if !a.runs.is_empty() {
        let mut runs = Vec::new();
        for p in &a.runs {
            let text = std::fs::read_to_string(p).map_err(finegraph_core::Error::from).with_context(|| format!("reading {}", p.display()))?;
            let r: RunOutput = serde_json::from_str(&text)
                .map_err(finegraph_core::Error::from)
                .with_context(|| format!("reading {}", p.display()))?;
            rec.input(p);
            runs.push(r);
        }
        runs.sort_by(|x, y| {
            (&x.kernel, &x.graph, x.scale, x.lanes).cmp(&(&y.kernel, &y.graph, y.scale, y.lanes))
        });
        md.push_str("## Simulated runs\n\n");
        md.push_str("| Algorithm | Graph | Scale | Nodes | Lanes | Simulated time (s) | GTEPS | Effective GTEPS |\n");
        md.push_str("|---|---|---:|---:|---:|---:|---:|---:|\n");
        for r in &runs {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} | {:.4e} | {:.3} | {} |",
                display_kernel(&r.kernel),
                r.graph,
                r.scale,
                r.nodes,
                r.lanes,
                r.sim.elapsed_seconds,
                r.gteps,
                r.effective_gteps.map_or("-".into(), |e| format!("{e:.3}"))
            );
        }
        md.push('\n');
    }
    if !a.projections.is_empty() {
        md.push_str("## Projections (best feasible cell)\n\n");
        md.push_str("| Algorithm | Family | Scale | Nodes | Runtime (s) | GTEPS | Effective GTEPS |\n");
        md.push_str("|---|---|---:|---:|---:|---:|---:|\n");
        for p in &a.projections {
            let mut r = csv::Reader::from_path(p).map_err(finegraph_core::Error::from).with_context(|| format!("reading {}", p.display()))?;
            let rows: Vec<ProjectionRow> = r
                .deserialize()
                .collect::<std::result::Result<_, _>>()
                .map_err(finegraph_core::Error::from)?;
            rec.input(p);
            let best = rows
                .iter()
                .filter(|r| r.feasible)
                .max_by(|x, y| x.effective_gteps.total_cmp(&y.effective_gteps));
            if let Some(b) = best {
                let _ = writeln!(
                    md,
                    "| {} | {} | {} | {} | {:.4e} | {:.1} | {:.1} |",
                    display_kernel(&b.algorithm),
                    b.family,
                    b.scale,
                    b.nodes,
                    b.runtime_s,
                    b.gteps,
                    b.effective_gteps
                );
            }
        }
        md.push('\n');
    }
    if !a.netstats.is_empty() {
        md.push_str("## Network\n\n");
        md.push_str("| Link bandwidth (B/ns) | Injected | Delivered | P50 (ns) | P99 (ns) | P99 / no-load | Max queue (B) |\n");
        md.push_str("|---:|---:|---:|---:|---:|---:|---:|\n");
        for p in &a.netstats {
            let text = std::fs::read_to_string(p).map_err(finegraph_core::Error::from).with_context(|| format!("reading {}", p.display()))?;
            let n: NetsimOutput = serde_json::from_str(&text).map_err(finegraph_core::Error::from)?;
            rec.input(p);
            let s = &n.stats;
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} | {} | {} |",
                s.link_bandwidth,
                s.injected,
                s.delivered,
                n.p50_ns.map_or("-".into(), |v| v.to_string()),
                n.p99_ns.map_or("-".into(), |v| v.to_string()),
                n.p99_over_no_load.map_or("-".into(), |v| format!("{v:.3}")),
                s.max_queue_bytes()
            );
        }
        md.push('\n');
    }
    if md.is_empty() {
        bail!(finegraph_core::Error::Parameter("report needs at least one input".into()));
    }
    match &a.out {
        Some(p) => {
            rec.output(p, md.into_bytes());
            rec.finish()
        }
        None => {
            print!("{md}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_display_names() {
        assert_eq!(display_kernel("dd_pr"), "Data-driven PR");
        assert_eq!(display_kernel("other"), "other");
    }

    #[test]
    fn label_is_stem() {
        assert_eq!(label_of(Path::new("/x/er10.fggs")), "er10");
    }

}
