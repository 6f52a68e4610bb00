//! Python bindings. Results come back as plain dicts and lists; option
//! dicts use the same keys as the CLI's TOML config sections.

use finegraph_core::graph::{self, io as gio};
use finegraph_core::kernels::{self, BfsOptions, BfsVariant, GraphView, PrOptions, PrVariant};
use finegraph_core::network::{self, NetConfig, TopologySpec};
use finegraph_core::projection::{self, MeasureOptions, SweepOptions, SystemParams, WorkRateModel, WorkloadCharacterization};
use finegraph_core::{profiler, Error, GeneratorParams, KernelKind, MachineConfig};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::path::PathBuf;

fn err(e: Error) -> PyErr {
    let msg = format!("{} error: {e}", e.kind());
    match e {
        Error::Parameter(_) | Error::Capacity(_) | Error::Toml(_) => PyValueError::new_err(msg),
        Error::Format(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => PyIOError::new_err(msg),
        _ => PyRuntimeError::new_err(msg),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| err(e.into()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Builds `T` from its defaults overlaid with `fields` and then `extra`.
fn from_py<T: DeserializeOwned>(
    py: Python<'_>,
    fields: serde_json::Value,
    extra: Option<&Bound<'_, PyAny>>,
) -> PyResult<T> {
    let mut obj = fields;
    if let Some(extra) = extra.filter(|e| !e.is_none()) {
        let text: String = py.import("json")?.call_method1("dumps", (extra,))?.extract()?;
        let more: serde_json::Value = serde_json::from_str(&text).map_err(|e| err(e.into()))?;
        let (Some(dst), Some(src)) = (obj.as_object_mut(), more.as_object()) else {
            return Err(PyValueError::new_err("options must be a dict"));
        };
        for (k, v) in src {
            dst.insert(k.clone(), v.clone());
        }
    }
    serde_json::from_value(obj).map_err(|e| PyValueError::new_err(format!("bad options: {e}")))
}

fn kernel(name: &str) -> PyResult<KernelKind> {
    name.parse().map_err(err)
}

fn machine(lanes: Option<u32>, nodes: Option<u32>, lanes_per_node: Option<u32>) -> PyResult<MachineConfig> {
    let mut m = match lanes {
        Some(l) => MachineConfig::for_total_lanes(l),
        None => MachineConfig::default(),
    };
    if let Some(n) = nodes {
        m.node_count = n;
    }
    if let Some(l) = lanes_per_node {
        m.lanes_per_node = l;
    }
    m.validate().map_err(err)?;
    Ok(m)
}

/// An undirected graph in CSR form.
#[pyclass(frozen, module = "finegraph")]
struct Graph {
    inner: finegraph_core::Graph,
}

#[pymethods]
impl Graph {
    /// Synthetic graph. `params` may set any generator field, e.g.
    /// `er_avg_degree` or `rmat_a`.
    #[staticmethod]
    #[pyo3(signature = (family, scale, seed = 1, **params))]
    fn generate(
        py: Python<'_>,
        family: &str,
        scale: u32,
        seed: u64,
        params: Option<&Bound<'_, PyDict>>,
    ) -> PyResult<Self> {
        let p: GeneratorParams = from_py(
            py,
            serde_json::json!({ "family": family, "scale": scale, "seed": seed }),
            params.map(|d| d.as_any()),
        )?;
        let inner = py.detach(|| graph::generate(&p)).map_err(err)?;
        Ok(Graph { inner })
    }

    /// Reads a binary or text edge-list file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Graph {
            inner: gio::load(&path).map_err(err)?,
        })
    }

    /// Builds a graph from undirected `(u, v)` pairs.
    #[staticmethod]
    fn from_edges(vertex_count: usize, edges: Vec<(u32, u32)>) -> PyResult<Self> {
        Ok(Graph {
            inner: finegraph_core::Graph::undirect(vertex_count, &edges).map_err(err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        gio::save(&self.inner, &path).map_err(err)
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn edge_count(&self) -> u64 {
        self.inner.undirected_edge_count()
    }

    #[getter]
    fn scale(&self) -> u32 {
        self.inner.scale()
    }

    fn degree(&self, v: u32) -> PyResult<u64> {
        self.check(v)?;
        Ok(self.inner.degree(v))
    }

    fn neighbors(&self, v: u32) -> PyResult<Vec<u32>> {
        self.check(v)?;
        Ok(self.inner.neighbors(v).to_vec())
    }

    /// Subgraph of vertices with at least one edge, and the original id of
    /// each kept vertex.
    fn connected_only(&self) -> (Graph, Vec<u32>) {
        let (g, ids) = self.inner.restrict_to_connected();
        (Graph { inner: g }, ids)
    }

    fn __len__(&self) -> usize {
        self.inner.vertex_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(vertices={}, edges={}, scale={})",
            self.inner.vertex_count(),
            self.inner.undirected_edge_count(),
            self.inner.scale()
        )
    }
}

impl Graph {
    fn check(&self, v: u32) -> PyResult<()> {
        if (v as usize) < self.inner.vertex_count() {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!("vertex {v} out of range")))
        }
    }
}

/// Runs one kernel on the simulated machine and returns its result dict.
/// `options` holds BFS or PageRank option fields.
#[pyfunction]
#[pyo3(signature = (graph, kernel_name, lanes = None, nodes = None, lanes_per_node = None, split_size = None, options = None))]
#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    graph: &Graph,
    kernel_name: &str,
    lanes: Option<u32>,
    nodes: Option<u32>,
    lanes_per_node: Option<u32>,
    split_size: Option<u64>,
    options: Option<&Bound<'_, PyAny>>,
) -> PyResult<Py<PyAny>> {
    let k = kernel(kernel_name)?;
    let cfg = machine(lanes, nodes, lanes_per_node)?;
    let g = &graph.inner;
    let split = split_size.map(|s| graph::split_vertices(g, s)).transpose().map_err(err)?;
    let view: GraphView<'_> = match &split {
        Some(s) => s.into(),
        None => g.into(),
    };
    if k.is_bfs() {
        let opts: BfsOptions = from_py(py, serde_json::json!({}), options)?;
        let variant = match k {
            KernelKind::PushBfs => BfsVariant::Push,
            KernelKind::PushPullBfs => BfsVariant::PushPull,
            _ => BfsVariant::LbPush,
        };
        let r = py.detach(|| kernels::run_bfs(view, &cfg, variant, &opts)).map_err(err)?;
        to_py(py, &r)
    } else {
        let opts: PrOptions = from_py(py, serde_json::json!({}), options)?;
        let variant = if k == KernelKind::PushPr { PrVariant::Push } else { PrVariant::DataDriven };
        let r = py.detach(|| kernels::run_pagerank(view, &cfg, variant, &opts)).map_err(err)?;
        to_py(py, &r)
    }
}

/// Hop distances from `source`; unreached vertices are `None`.
#[pyfunction]
fn bfs_distances(graph: &Graph, source: u32) -> PyResult<Vec<Option<u32>>> {
    graph.check(source)?;
    Ok(kernels::seq_bfs_oracle(&graph.inner, source)
        .into_iter()
        .map(|d| (d != kernels::UNREACHED).then_some(d))
        .collect())
}

/// Dense power-iteration PageRank; returns `(scores, iterations)`.
#[pyfunction]
#[pyo3(signature = (graph, alpha = 0.85, tol = None, max_iters = 1000))]
fn pagerank_reference(graph: &Graph, alpha: f64, tol: Option<f64>, max_iters: usize) -> (Vec<f64>, usize) {
    let n = graph.inner.vertex_count().max(1);
    kernels::power_iteration_oracle(&graph.inner, alpha, tol.unwrap_or(1.0 / n as f64), max_iters)
}

/// Edge operations available at each step of a kernel.
#[pyfunction]
#[pyo3(signature = (graph, algorithm, source = 0, alpha = 0.85, tol = None, max_iters = None))]
fn profile(
    graph: &Graph,
    algorithm: &str,
    source: u32,
    alpha: f64,
    tol: Option<f64>,
    max_iters: Option<usize>,
) -> PyResult<Vec<u64>> {
    let k = kernel(algorithm)?;
    let g = &graph.inner;
    let p = if k.is_bfs() {
        profiler::profile_bfs(g, source)
    } else {
        let variant = if k == KernelKind::PushPr { PrVariant::Push } else { PrVariant::DataDriven };
        let cap = max_iters.unwrap_or(if variant == PrVariant::Push { 1000 } else { 5 });
        profiler::profile_pr(g, alpha, tol.unwrap_or(1.0 / g.vertex_count().max(1) as f64), variant, cap)
    }
    .map_err(err)?;
    Ok(p.ops)
}

/// Fits the per-lane work-rate curve to `(work_per_lane, rate_per_lane)` points.
#[pyfunction]
fn fit_work_rate(py: Python<'_>, work_per_lane: Vec<f64>, rate_per_lane: Vec<f64>) -> PyResult<Py<PyAny>> {
    let m = projection::fit_points(&work_per_lane, &rate_per_lane).map_err(err)?;
    to_py(py, &m)
}

/// Evaluates a fitted model at the given work-per-lane values.
#[pyfunction]
fn work_rate(py: Python<'_>, model: &Bound<'_, PyAny>, work_per_lane: Vec<f64>) -> PyResult<Vec<f64>> {
    let m: WorkRateModel = from_py(py, serde_json::json!({}), Some(model))?;
    Ok(work_per_lane.into_iter().map(|x| m.rate(x)).collect())
}

/// Measures a kernel's workload on generated graphs and extrapolates it in scale.
#[pyfunction]
#[pyo3(signature = (family, algorithm, scales, seed = 1, options = None))]
fn characterize(
    py: Python<'_>,
    family: &str,
    algorithm: &str,
    scales: Vec<u32>,
    seed: u64,
    options: Option<&Bound<'_, PyAny>>,
) -> PyResult<Py<PyAny>> {
    let k = kernel(algorithm)?;
    let measure: MeasureOptions = from_py(py, serde_json::json!({}), options)?;
    let fam: finegraph_core::GeneratorFamily =
        serde_json::from_value(serde_json::json!(family)).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let wc = py
        .detach(|| {
            let measured = scales
                .iter()
                .map(|&scale| {
                    let g = graph::generate(&GeneratorParams {
                        family: fam,
                        scale,
                        seed,
                        ..Default::default()
                    })?;
                    projection::measure_workload(&g, k, &measure)
                })
                .collect::<finegraph_core::Result<Vec<_>>>()?;
            projection::characterize_workload(k.name(), fam.label(), &measured)
        })
        .map_err(err)?;
    to_py(py, &wc)
}

/// Projected runtime and GTEPS for every `(scale, nodes)` pair.
#[pyfunction]
#[pyo3(signature = (model, workload, nodes, scales, system = None, original = None, bracket = "traversal_once"))]
#[allow(clippy::too_many_arguments)]
fn project(
    py: Python<'_>,
    model: &Bound<'_, PyAny>,
    workload: &Bound<'_, PyAny>,
    nodes: Vec<u32>,
    scales: Vec<u32>,
    system: Option<&Bound<'_, PyAny>>,
    original: Option<&Bound<'_, PyAny>>,
    bracket: &str,
) -> PyResult<Py<PyAny>> {
    let m: WorkRateModel = from_py(py, serde_json::json!({}), Some(model))?;
    let wc: WorkloadCharacterization = from_py(py, serde_json::json!({}), Some(workload))?;
    let orig: Option<WorkloadCharacterization> = match original.filter(|o| !o.is_none()) {
        Some(o) => Some(from_py(py, serde_json::json!({}), Some(o))?),
        None => None,
    };
    let sys: SystemParams = from_py(py, serde_json::json!({}), system)?;
    let opts = SweepOptions {
        original: orig.as_ref(),
        bracket: bracket.parse().map_err(err)?,
    };
    let rows = projection::sweep(&m, &wc, &sys, &nodes, &scales, &opts).map_err(err)?;
    to_py(py, &rows)
}

/// Congestion simulation on a synthetic or file topology. `options` holds
/// network config fields such as `link_bandwidth` or `duration_ns`.
#[pyfunction]
#[pyo3(signature = (routers = 64, compute_nodes = 256, radix = 14, topology_seed = 1, topology = None, options = None))]
fn netsim(
    py: Python<'_>,
    routers: u32,
    compute_nodes: u32,
    radix: u32,
    topology_seed: u64,
    topology: Option<PathBuf>,
    options: Option<&Bound<'_, PyAny>>,
) -> PyResult<Py<PyAny>> {
    let cfg: NetConfig = from_py(py, serde_json::json!({}), options)?;
    let spec = match topology {
        Some(path) => TopologySpec::File { path, radix: None },
        None => TopologySpec::Synthetic {
            router_count: routers,
            radix,
            node_count: compute_nodes,
            seed: topology_seed,
        },
    };
    let (stats, sat) = py
        .detach(|| {
            let t = network::build_topology(&spec)?;
            let routes = network::compute_routes(&t)?;
            let stats = network::simulate(&t, &routes, &cfg)?;
            Ok::<_, Error>((stats, network::saturation_bandwidth(&t, &routes, &cfg)))
        })
        .map_err(err)?;
    let out = serde_json::json!({
        "saturation_bandwidth": sat,
        "p50_ns": stats.latency.percentile(0.5),
        "p99_ns": stats.latency.percentile(0.99),
        "max_ns": stats.latency.max(),
        "mean_ns": stats.latency.mean(),
        "p99_over_no_load": stats.p99_ratio(),
        "stats": stats,
    });
    to_py(py, &out)
}

#[pymodule]
fn finegraph(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Graph>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(bfs_distances, m)?)?;
    m.add_function(wrap_pyfunction!(pagerank_reference, m)?)?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    m.add_function(wrap_pyfunction!(fit_work_rate, m)?)?;
    m.add_function(wrap_pyfunction!(work_rate, m)?)?;
    m.add_function(wrap_pyfunction!(characterize, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(netsim, m)?)?;
    Ok(())
}
