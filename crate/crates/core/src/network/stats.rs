use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueSample {
    pub t_ns: u32,
    pub max_queue_bytes: u64,
    pub frac_nonempty: f64,
    pub injected: u64,
    pub delivered: u64,
    pub in_flight: u64,
}

/// Delivered-message latencies, one bucket per nanosecond.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyHistogram {
    counts: Vec<u64>,
    total: u64,
    sum: u128,
}

impl LatencyHistogram {
    pub fn from_latencies(latencies: &[u32]) -> Self {
        let mut h = Self::default();
        for &l in latencies {
            h.record(l);
        }
        h
    }

    pub fn record(&mut self, latency_ns: u32) {
        let i = latency_ns as usize;
        if self.counts.len() <= i {
            self.counts.resize(i + 1, 0);
        }
        self.counts[i] += 1;
        self.total += 1;
        self.sum += latency_ns as u128;
    }

    pub fn count(&self) -> u64 {
        self.total
    }

    pub fn mean(&self) -> Option<f64> {
        (self.total > 0).then(|| self.sum as f64 / self.total as f64)
    }

    pub fn min(&self) -> Option<u32> {
        self.counts.iter().position(|&c| c > 0).map(|i| i as u32)
    }

    pub fn max(&self) -> Option<u32> {
        self.counts.iter().rposition(|&c| c > 0).map(|i| i as u32)
    }

    /// Nearest-rank percentile, `q` in (0, 1].
    pub fn percentile(&self, q: f64) -> Option<u32> {
        if self.total == 0 {
            return None;
        }
        let rank = ((q * self.total as f64).ceil() as u64).clamp(1, self.total);
        let mut seen = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            seen += c;
            if seen >= rank {
                return Some(i as u32);
            }
        }
        self.max()
    }

    /// `(latency, P[latency ≥ that value])` at each observed latency.
    pub fn ccdf(&self) -> Vec<(u32, f64)> {
        let mut out = Vec::new();
        let mut above = self.total;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                out.push((i as u32, above as f64 / self.total as f64));
                above -= c;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetStats {
    pub queue_series: Vec<QueueSample>,
    pub latency: LatencyHistogram,
    pub injected: u64,
    pub delivered: u64,
    pub in_flight: u64,
    pub reroutes: u64,
    pub hop_cap_triggers: u64,
    /// Samples where injected ≠ delivered + in flight.
    pub conservation_violations: u64,
    /// Deliveries faster than their router hops allow.
    pub latency_bound_violations: u64,
    pub max_router_link_bytes_per_ns: u32,
    /// Worst-case unloaded latency: (diameter + 2) hops.
    pub no_load_latency_ns: u32,
    pub message_bytes: u32,
    pub link_bandwidth: f64,
    /// One-line description of the router graph the run used.
    pub topology: String,
}

impl NetStats {
    pub fn new(no_load_latency_ns: u32, message_bytes: u32, link_bandwidth: f64) -> Self {
        NetStats {
            queue_series: Vec::new(),
            latency: LatencyHistogram::default(),
            injected: 0,
            delivered: 0,
            in_flight: 0,
            reroutes: 0,
            hop_cap_triggers: 0,
            conservation_violations: 0,
            latency_bound_violations: 0,
            max_router_link_bytes_per_ns: 0,
            no_load_latency_ns,
            message_bytes,
            link_bandwidth,
            topology: String::new(),
        }
    }

    pub(crate) fn record_delivery(&mut self, latency: u32, hops: u32, hop_latency: u32) {
        if latency < hops * hop_latency {
            self.latency_bound_violations += 1;
        }
        self.latency.record(latency);
        self.delivered += 1;
    }

    pub fn max_queue_bytes(&self) -> u64 {
        self.queue_series
            .iter()
            .map(|q| q.max_queue_bytes)
            .max()
            .unwrap_or(0)
    }

    /// P99 over the worst-case unloaded latency.
    pub fn p99_ratio(&self) -> Option<f64> {
        self.latency
            .percentile(0.99)
            .map(|p| p as f64 / self.no_load_latency_ns as f64)
    }

    pub fn write_queue_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["t_ns", "max_queue_bytes", "frac_nonempty"])?;
        for q in &self.queue_series {
            w.write_record([
                q.t_ns.to_string(),
                q.max_queue_bytes.to_string(),
                q.frac_nonempty.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_ccdf_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["latency_ns", "ccdf"])?;
        for (l, p) in self.latency.ccdf() {
            w.write_record([l.to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn opt(v: Option<u32>) -> String {
    v.map_or("-".into(), |v| v.to_string())
}

/// Plain-text summary: counters, latency percentiles, the latency CCDF in
/// units of the unloaded latency, and the queue series.
pub fn stats_report(s: &NetStats) -> String {
    let mut out = String::new();
    if !s.topology.is_empty() {
        let _ = writeln!(out, "topology            {}", s.topology);
    }
    let _ = writeln!(out, "link bandwidth      {} B/ns", s.link_bandwidth);
    let _ = writeln!(out, "messages injected   {}", s.injected);
    let _ = writeln!(out, "messages delivered  {}", s.delivered);
    let _ = writeln!(out, "messages in flight  {}", s.in_flight);
    let _ = writeln!(out, "reroutes            {}", s.reroutes);
    let _ = writeln!(out, "hop cap triggered   {}", s.hop_cap_triggers);
    let _ = writeln!(out, "no-load latency     {} ns", s.no_load_latency_ns);
    let _ = writeln!(
        out,
        "latency p50/p99/max {} / {} / {} ns",
        opt(s.latency.percentile(0.5)),
        opt(s.latency.percentile(0.99)),
        opt(s.latency.max())
    );
    if let Some(r) = s.p99_ratio() {
        let _ = writeln!(out, "p99 / no-load       {r:.3}");
    }
    let _ = writeln!(out, "max queue           {} B", s.max_queue_bytes());
    let _ = writeln!(out, "\nlatency/no-load  ccdf");
    for (l, p) in s.latency.ccdf() {
        let _ = writeln!(
            out,
            "{:>14.3}  {p:.6}",
            l as f64 / s.no_load_latency_ns.max(1) as f64
        );
    }
    let _ = writeln!(out, "\n  t_ns  max_queue_bytes  frac_nonempty");
    for q in &s.queue_series {
        let _ = writeln!(
            out,
            "{:>6}  {:>15}  {:>13.4}",
            q.t_ns, q.max_queue_bytes, q.frac_nonempty
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_latencies() {
        let h = LatencyHistogram::from_latencies(&[500, 500, 1000]);
        assert_eq!(h.percentile(0.99), Some(1000));
        assert_eq!(h.percentile(0.5), Some(500));
        assert_eq!(h.max(), Some(1000));
        assert_eq!(h.ccdf(), vec![(500, 1.0), (1000, 1.0 / 3.0)]);
        assert!((h.mean().unwrap() - 2000.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_stats() {
        let s = NetStats::new(500, 34, 2200.0);
        assert_eq!(s.latency.percentile(0.99), None);
        assert!(s.latency.ccdf().is_empty());
        assert_eq!(s.p99_ratio(), None);
        let mut q = Vec::new();
        s.write_queue_csv(&mut q).unwrap();
        assert_eq!(
            String::from_utf8(q).unwrap(),
            "t_ns,max_queue_bytes,frac_nonempty\n"
        );
        let mut c = Vec::new();
        s.write_ccdf_csv(&mut c).unwrap();
        assert_eq!(String::from_utf8(c).unwrap(), "latency_ns,ccdf\n");
        assert!(stats_report(&s).contains("p50/p99/max - / - / -"));
    }

    #[test]
    fn report_normalizes() {
        let mut s = NetStats::new(500, 34, 2200.0);
        for l in [500, 1000] {
            s.record_delivery(l, 3, 100);
        }
        assert_eq!(s.p99_ratio(), Some(2.0));
        assert!(stats_report(&s).contains("2.000  0.500000"));
    }
}
