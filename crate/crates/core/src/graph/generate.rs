//! Seed-deterministic synthetic graph generators.
//!
//! ER and RMAT sampling is partitioned into a fixed number of blocks, each
//! drawing from its own ChaCha stream, so output does not depend on how many
//! host threads run the blocks.

use super::Graph;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorFamily {
    #[serde(alias = "ER")]
    Er,
    #[serde(alias = "RMAT")]
    Rmat,
    #[serde(alias = "FF", alias = "ForestFire")]
    ForestFire,
}

impl GeneratorFamily {
    pub fn label(self) -> &'static str {
        match self {
            GeneratorFamily::Er => "er",
            GeneratorFamily::Rmat => "rmat",
            GeneratorFamily::ForestFire => "ff",
        }
    }
}

impl std::str::FromStr for GeneratorFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "er" | "erdos-renyi" | "erdos_renyi" => Ok(GeneratorFamily::Er),
            "rmat" => Ok(GeneratorFamily::Rmat),
            "ff" | "forest-fire" | "forest_fire" | "forestfire" => Ok(GeneratorFamily::ForestFire),
            other => Err(Error::Parameter(format!("unknown graph family '{other}'"))),
        }
    }
}

impl std::fmt::Display for GeneratorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorParams {
    pub family: GeneratorFamily,
    pub scale: u32,
    pub er_avg_degree: f64,
    pub rmat_a: f64,
    pub rmat_b: f64,
    pub rmat_c: f64,
    pub rmat_avg_degree: f64,
    pub ff_p_burn: f64,
    pub seed: u64,
    /// Generation refuses to start when its estimated footprint exceeds this.
    pub memory_budget_bytes: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            family: GeneratorFamily::Er,
            scale: 10,
            er_avg_degree: 35.0,
            rmat_a: 0.57,
            rmat_b: 0.19,
            rmat_c: 0.19,
            rmat_avg_degree: 16.0,
            ff_p_burn: 0.4,
            seed: 1,
            memory_budget_bytes: 4 << 30,
        }
    }
}

impl GeneratorParams {
    pub fn new(family: GeneratorFamily, scale: u32, seed: u64) -> Self {
        GeneratorParams {
            family,
            scale,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} = {x} is not in [0, 1]")))
            }
        };
        prob("rmat_a", self.rmat_a)?;
        prob("rmat_b", self.rmat_b)?;
        prob("rmat_c", self.rmat_c)?;
        prob("ff_p_burn", self.ff_p_burn)?;
        if self.rmat_a + 2.0 * self.rmat_b > 1.0 + 1e-12
            || self.rmat_a + self.rmat_b + self.rmat_c > 1.0 + 1e-12
        {
            return Err(Error::Parameter(
                "RMAT quadrant probabilities exceed 1".into(),
            ));
        }
        if self.ff_p_burn >= 1.0 {
            return Err(Error::Parameter("ff_p_burn must be below 1".into()));
        }
        if !(self.er_avg_degree >= 0.0) || !(self.rmat_avg_degree >= 0.0) {
            return Err(Error::Parameter(
                "average degree must be non-negative".into(),
            ));
        }
        if self.scale > 31 {
            return Err(Error::Capacity(format!(
                "scale {} exceeds 32-bit vertex ids",
                self.scale
            )));
        }
        Ok(())
    }

    fn check_budget(&self, expected_undirected_edges: f64) -> Result<()> {
        let n = (1u64 << self.scale) as f64;
        // Edge samples, CSR neighbors (both directions) and offsets.
        let bytes = expected_undirected_edges * (8.0 + 8.0) + n * 8.0;
        if bytes > self.memory_budget_bytes as f64 {
            return Err(Error::Capacity(format!(
                "scale {} needs about {:.1} GiB, budget is {:.1} GiB",
                self.scale,
                bytes / (1u64 << 30) as f64,
                self.memory_budget_bytes as f64 / (1u64 << 30) as f64
            )));
        }
        Ok(())
    }
}

/// Dispatches on `params.family`.
pub fn generate(params: &GeneratorParams) -> Result<Graph> {
    match params.family {
        GeneratorFamily::Er => generate_er(params),
        GeneratorFamily::Rmat => generate_rmat(params),
        GeneratorFamily::ForestFire => generate_forest_fire(params),
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Erdős–Rényi G(n, p) with `p = er_avg_degree / n`, sampled by geometric
/// skipping over the lower-triangular pair space.
pub fn generate_er(params: &GeneratorParams) -> Result<Graph> {
    params.validate()?;
    if params.scale < 4 {
        return Err(Error::Parameter("ER generation needs scale >= 4".into()));
    }
    let n = 1usize << params.scale;
    let p = (params.er_avg_degree / n as f64).min(1.0);
    params.check_budget(p * (n as f64) * (n as f64 - 1.0) / 2.0)?;
    if p <= 0.0 {
        return Ok(Graph::empty(n));
    }
    // Row blocks holding roughly equal numbers of pairs.
    let blocks = 256.min(n);
    let bounds: Vec<usize> = (0..=blocks)
        .map(|k| ((n as f64) * (k as f64 / blocks as f64).sqrt()).round() as usize)
        .collect();
    let parts: Vec<Vec<(u32, u32)>> = (0..blocks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(params.seed, k as u64);
            er_rows(&mut rng, bounds[k], bounds[k + 1], p)
        })
        .collect();
    let edges: Vec<(u32, u32)> = parts.concat();
    Ok(Graph::undirect(n, &edges)?.with_scale(params.scale))
}

/// Pairs `(v, w)` with `w < v` and `v` in `[row_start, row_end)`.
fn er_rows(rng: &mut ChaCha8Rng, row_start: usize, row_end: usize, p: f64) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    if row_start >= row_end {
        return out;
    }
    if p >= 1.0 {
        for v in row_start..row_end {
            for w in 0..v {
                out.push((v as u32, w as u32));
            }
        }
        return out;
    }
    let log_q = (1.0 - p).ln();
    let mut v = row_start.max(1) as i64;
    let mut w: i64 = -1;
    let end = row_end as i64;
    while v < end {
        let r: f64 = rng.random();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v && v < end {
            w -= v;
            v += 1;
        }
        if v < end {
            out.push((v as u32, w as u32));
        }
    }
    out
}

const RMAT_BLOCK: u64 = 1 << 16;

/// Recursive-matrix generator: `n·d/2` directed samples, then undirected
/// and deduplicated.
pub fn generate_rmat(params: &GeneratorParams) -> Result<Graph> {
    params.validate()?;
    let n = 1usize << params.scale;
    let samples = (n as f64 * params.rmat_avg_degree / 2.0).round() as u64;
    params.check_budget(samples as f64)?;
    let blocks = samples.div_ceil(RMAT_BLOCK);
    let (a, b, c) = (params.rmat_a, params.rmat_b, params.rmat_c);
    let parts: Vec<Vec<(u32, u32)>> = (0..blocks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(params.seed, k);
            let count = RMAT_BLOCK.min(samples - k * RMAT_BLOCK);
            (0..count)
                .map(|_| rmat_sample(&mut rng, params.scale, a, b, c))
                .collect()
        })
        .collect();
    let edges: Vec<(u32, u32)> = parts.concat();
    Ok(Graph::undirect(n, &edges)?.with_scale(params.scale))
}

fn rmat_sample(rng: &mut ChaCha8Rng, scale: u32, a: f64, b: f64, c: f64) -> (u32, u32) {
    let (mut u, mut v) = (0u32, 0u32);
    for _ in 0..scale {
        let r: f64 = rng.random();
        let (du, dv) = if r < a {
            (0, 0)
        } else if r < a + b {
            (0, 1)
        } else if r < a + b + c {
            (1, 0)
        } else {
            (1, 1)
        };
        u = (u << 1) | du;
        v = (v << 1) | dv;
    }
    (u, v)
}

/// Forest Fire growth: each arriving vertex picks a uniform ambassador and
/// burns outward breadth-first. Each burning vertex spreads to a geometric
/// number (`P(k) = (1 - p) p^k`) of its not-yet-burned links, in- and
/// out-links pooled. The new vertex links to everything burned.
pub fn generate_forest_fire(params: &GeneratorParams) -> Result<Graph> {
    params.validate()?;
    let n = 1usize << params.scale;
    forest_fire_vertices(n, params)
}

pub(crate) fn forest_fire_vertices(n: usize, params: &GeneratorParams) -> Result<Graph> {
    let p = params.ff_p_burn;
    params.check_budget(n as f64 * p / (1.0 - p) * 4.0)?;
    let mut rng = stream_rng(params.seed, 0);
    // Links made so far, both directions; burning treats in- and out-links alike.
    let mut links: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut stamp = vec![u32::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    let mut burned = Vec::new();
    let mut candidates = Vec::new();
    for v in 1..n {
        let ambassador = rng.random_range(0..v) as u32;
        let tag = v as u32;
        stamp[ambassador as usize] = tag;
        stamp[v] = tag;
        burned.clear();
        burned.push(ambassador);
        queue.clear();
        queue.push_back(ambassador);
        while let Some(x) = queue.pop_front() {
            let want = geometric(&mut rng, p);
            if want == 0 {
                continue;
            }
            candidates.clear();
            candidates.extend(links[x as usize].iter().copied().filter(|&y| stamp[y as usize] != tag));
            let take = want.min(candidates.len());
            for i in 0..take {
                let j = rng.random_range(i..candidates.len());
                candidates.swap(i, j);
                let y = candidates[i];
                stamp[y as usize] = tag;
                burned.push(y);
                queue.push_back(y);
            }
        }
        for &y in &burned {
            links[v].push(y);
            links[y as usize].push(v as u32);
        }
    }
    let mut edges = Vec::new();
    for (v, list) in links.iter().enumerate() {
        edges.extend(list.iter().filter(|&&y| (y as usize) < v).map(|&y| (v as u32, y)));
    }
    drop(links);
    Ok(Graph::undirect(n, &edges)?.with_scale(params.scale))
}

/// `P(k) = (1 - p) p^k`.
fn geometric(rng: &mut ChaCha8Rng, p: f64) -> usize {
    let mut k = 0;
    while rng.random::<f64>() < p {
        k += 1;
    }
    k
}
