use crate::error::{Error, Result};
use crate::machine::SimResult;
use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::storage::Owned;
use nalgebra::{DVector, Dyn, OMatrix, Vector3, U3};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// One measured point of per-lane work against per-lane work rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkRateSample {
    pub algorithm: String,
    pub family: String,
    pub scale: u32,
    pub nodes: u32,
    pub work_per_lane: f64,
    /// Work per second per lane.
    pub rate_per_lane: f64,
}

impl WorkRateSample {
    /// Sample from a simulated run that performed `work` units of work.
    pub fn from_run(algorithm: &str, family: &str, sim: &SimResult, work: u64) -> Result<Self> {
        let lanes = sim.total_lanes() as f64;
        if work == 0 || !(sim.elapsed_seconds > 0.0) {
            return Err(Error::InsufficientData(
                "a work-rate sample needs positive work and runtime".into(),
            ));
        }
        let per_lane = work as f64 / lanes;
        Ok(WorkRateSample {
            algorithm: algorithm.into(),
            family: family.into(),
            scale: sim.scale,
            nodes: sim.nodes,
            work_per_lane: per_lane,
            rate_per_lane: per_lane / sim.elapsed_seconds,
        })
    }
}

pub fn read_samples<R: Read>(reader: R) -> Result<Vec<WorkRateSample>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in r.deserialize() {
        let s: WorkRateSample = row?;
        if !(s.work_per_lane > 0.0 && s.rate_per_lane > 0.0)
            || !s.work_per_lane.is_finite()
            || !s.rate_per_lane.is_finite()
        {
            return Err(Error::Format(format!(
                "sample at scale {} has non-positive work or rate",
                s.scale
            )));
        }
        out.push(s);
    }
    Ok(out)
}

pub fn write_samples<W: Write>(writer: W, samples: &[WorkRateSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for s in samples {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

/// `f(x) = c·x / (1 + (x/x0)^k)`, capped at `rate_cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkRateModel {
    pub c: f64,
    pub x0: f64,
    pub k: f64,
    pub rate_cutoff: f64,
    /// Root mean square of the log-space residuals of the fit.
    pub residual_rms: f64,
}

impl WorkRateModel {
    pub fn new(c: f64, x0: f64, k: f64, rate_cutoff: f64) -> Self {
        WorkRateModel {
            c,
            x0,
            k,
            rate_cutoff,
            residual_rms: 0.0,
        }
    }

    /// The uncapped sigmoid.
    pub fn sigmoid(&self, x: f64) -> f64 {
        self.c * x / (1.0 + (x / self.x0).powf(self.k))
    }

    /// Predicted per-lane rate.
    pub fn rate(&self, x: f64) -> f64 {
        self.sigmoid(x).min(self.rate_cutoff)
    }

    /// Whether the capped rate can only grow with work; false for `k > 1`,
    /// where the sigmoid eventually falls.
    pub fn is_monotone(&self) -> bool {
        self.k <= 1.0
    }
}

struct LogSigmoid<'a> {
    lx: &'a [f64],
    ly: &'a [f64],
    /// Log of the rate cutoff; predictions above it are clamped.
    lcap: f64,
    p: Vector3<f64>,
}

impl LogSigmoid<'_> {
    fn uncapped(&self, lx: f64) -> f64 {
        self.p[0] + lx - softplus(self.p[2] * (lx - self.p[1]))
    }
}

fn softplus(t: f64) -> f64 {
    if t > 30.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl LeastSquaresProblem<f64, Dyn, U3> for LogSigmoid<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U3>;
    type ParameterStorage = Owned<f64, U3>;

    fn set_params(&mut self, p: &Vector3<f64>) {
        self.p = *p;
    }

    fn params(&self) -> Vector3<f64> {
        self.p
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let r = DVector::from_iterator(
            self.lx.len(),
            self.lx
                .iter()
                .zip(self.ly)
                .map(|(&lx, &ly)| self.uncapped(lx).min(self.lcap) - ly),
        );
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn jacobian(&self) -> Option<OMatrix<f64, Dyn, U3>> {
        let (lx0, k) = (self.p[1], self.p[2]);
        let mut j = OMatrix::<f64, Dyn, U3>::zeros(self.lx.len());
        for (i, &lx) in self.lx.iter().enumerate() {
            if self.uncapped(lx) > self.lcap {
                continue;
            }
            let d = lx - lx0;
            let s = logistic(k * d);
            j[(i, 0)] = 1.0;
            j[(i, 1)] = k * s;
            j[(i, 2)] = -s * d;
        }
        j.iter().all(|v| v.is_finite()).then_some(j)
    }
}

/// Least-squares fit of the sigmoid to `(work_per_lane, rate_per_lane)`
/// pairs in log space, started from a grid of knees and exponents.
pub fn fit_work_rate(samples: &[WorkRateSample]) -> Result<WorkRateModel> {
    let xs: Vec<f64> = samples.iter().map(|s| s.work_per_lane).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.rate_per_lane).collect();
    fit_points(&xs, &ys)
}

pub fn fit_points(xs: &[f64], ys: &[f64]) -> Result<WorkRateModel> {
    if xs.len() != ys.len() {
        return Err(Error::Parameter(
            "work and rate series differ in length".into(),
        ));
    }
    if xs.len() < 4 {
        return Err(Error::Fit("at least 4 samples are needed".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Fit("samples must be positive and finite".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (lo, hi) = lx
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if hi - lo < 10f64.ln() - 1e-12 {
        return Err(Error::Fit(
            "samples must span at least one decade of work".into(),
        ));
    }
    let cutoff = ys.iter().copied().fold(0.0, f64::max);
    let lcap = cutoff.ln();
    let solver = LevenbergMarquardt::new().with_patience(400);
    let mut best: Option<(f64, Vector3<f64>)> = None;
    for i in 0..9 {
        let lx0 = lo - 1.0 + (hi - lo + 2.0) * i as f64 / 8.0;
        for k in [0.5, 1.0, 1.5, 2.5] {
            let lc = lx
                .iter()
                .zip(&ly)
                .map(|(&x, &y)| y - x + softplus(k * (x - lx0)))
                .sum::<f64>()
                / lx.len() as f64;
            let problem = LogSigmoid {
                lx: &lx,
                ly: &ly,
                lcap,
                p: Vector3::new(lc, lx0, k),
            };
            let (fitted, report) = solver.minimize(problem);
            let cost = report.objective_function;
            if !cost.is_finite() || !fitted.p.iter().all(|v| v.is_finite()) {
                continue;
            }
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, fitted.p));
            }
        }
    }
    let (cost, p) = best.ok_or_else(|| Error::Fit("no start converged".into()))?;
    if !(p[2] > 0.0) {
        return Err(Error::Fit(format!(
            "fitted exponent {} is not positive",
            p[2]
        )));
    }
    Ok(WorkRateModel {
        c: p[0].exp(),
        x0: p[1].exp(),
        k: p[2],
        rate_cutoff: cutoff,
        residual_rms: (2.0 * cost / xs.len() as f64).sqrt(),
    })
}
