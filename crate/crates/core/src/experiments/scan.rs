use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::frobenius::{eps_p, record_with_frobenius, PrimeRecord};
use crate::polyring::{PolyA, PolyRing};
use crate::skew::DrinfeldModule;

pub const DEFAULT_DEGREE_CAP: usize = 12;

/// Enumeration indices handed to one worker at a time.
const CHUNK: u64 = 2048;

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub module: DrinfeldModule,
    pub n_min: usize,
    pub n_max: usize,
    /// Lang–Trotter targets t, counted as a_𝔭 = t.
    pub targets: Vec<PolyA>,
    pub threads: usize,
    pub degree_cap: usize,
}

impl ScanConfig {
    /// Degrees `n_min..=n_max` with targets 0, 1, T.
    pub fn new(module: &DrinfeldModule, n_min: usize, n_max: usize) -> Self {
        let ring = module.ring();
        ScanConfig {
            module: module.clone(),
            n_min,
            n_max,
            targets: vec![ring.zero(), ring.one(), ring.t()],
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }

    pub fn with_targets(mut self, targets: Vec<PolyA>) -> Self {
        self.targets = targets;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::InvalidArgument(format!(
                "degree range {}..{} is empty or starts at 0",
                self.n_min, self.n_max
            )));
        }
        if self.n_max > self.degree_cap {
            return Err(Error::DegreeCap {
                n: self.n_max,
                cap: self.degree_cap,
            });
        }
        if self.module.rank() != 2 {
            return Err(Error::Rank("scans need a rank-2 module".into()));
        }
        // ε must be available for the family
        let ring = self.module.ring();
        eps_p(&self.module, &ring.t_minus(1))?;
        Ok(())
    }
}

/// Counts for one degree.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeSummary {
    pub n: usize,
    pub pi: u64,
    pub good: u64,
    pub cyclic: u64,
    pub koblitz: u64,
    /// counts of a_𝔭 = t per configured target
    pub lt: Vec<(PolyA, u64)>,
    /// counts of every observed a_𝔭
    pub a_values: BTreeMap<PolyA, u64>,
    pub bad: Vec<PolyA>,
}

impl DegreeSummary {
    fn new(n: usize, pi: u64, targets: &[PolyA]) -> Self {
        DegreeSummary {
            n,
            pi,
            good: 0,
            cyclic: 0,
            koblitz: 0,
            lt: targets.iter().map(|t| (t.clone(), 0)).collect(),
            a_values: BTreeMap::new(),
            bad: Vec::new(),
        }
    }

    fn add(&mut self, r: &PrimeRecord) {
        self.good += 1;
        self.cyclic += r.cyclic as u64;
        self.koblitz += r.koblitz as u64;
        *self.a_values.entry(r.a_p.clone()).or_insert(0) += 1;
        for (t, c) in self.lt.iter_mut() {
            if *t == r.a_p {
                *c += 1;
            }
        }
    }

    pub fn lt_count(&self, t: &PolyA) -> Option<u64> {
        self.lt.iter().find(|(s, _)| s == t).map(|(_, c)| *c)
    }

    /// f/π.
    pub fn cyclic_ratio(&self) -> f64 {
        self.cyclic as f64 / self.pi as f64
    }

    /// P·n²/q^n.
    pub fn koblitz_ratio(&self, q: u32) -> f64 {
        self.koblitz as f64 * (self.n * self.n) as f64 / (q as f64).powi(self.n as i32)
    }

    /// P_t·n/q^{n/2}.
    pub fn lt_ratio(&self, q: u32, t: &PolyA) -> Option<f64> {
        self.lt_count(t)
            .map(|c| c as f64 * self.n as f64 / (q as f64).powf(self.n as f64 / 2.0))
    }

    pub fn to_json(&self, ring: &PolyRing, phi: &str) -> Value {
        let q = ring.q();
        let lt: serde_json::Map<String, Value> =
            self.lt.iter().map(|(t, c)| (ring.format(t), json!(c))).collect();
        let lt_ratio: serde_json::Map<String, Value> = self
            .lt
            .iter()
            .map(|(t, _)| (ring.format(t), json!(self.lt_ratio(q, t))))
            .collect();
        let a_values: serde_json::Map<String, Value> =
            self.a_values.iter().map(|(a, c)| (ring.format(a), json!(c))).collect();
        json!({
            "q": q,
            "phi": phi,
            "n": self.n,
            "pi": self.pi,
            "good": self.good,
            "cyclic": self.cyclic,
            "koblitz": self.koblitz,
            "lt": lt,
            "a_values": a_values,
            "bad": self.bad.iter().map(|b| ring.format(b)).collect::<Vec<_>>(),
            "cyclic_ratio": self.cyclic_ratio(),
            "koblitz_ratio": self.koblitz_ratio(q),
            "lt_ratio": lt_ratio,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSummary {
    pub q: u32,
    pub phi: String,
    pub degrees: Vec<DegreeSummary>,
}

impl ScanSummary {
    pub fn degree(&self, n: usize) -> Option<&DegreeSummary> {
        self.degrees.iter().find(|d| d.n == n)
    }

    /// One object per degree.
    pub fn to_json(&self, ring: &PolyRing) -> Value {
        Value::Array(self.degrees.iter().map(|d| d.to_json(ring, &self.phi)).collect())
    }
}

struct ChunkOut {
    records: Vec<PrimeRecord>,
    bad: Vec<PolyA>,
}

fn run_chunk(module: &DrinfeldModule, n: usize, start: u64, end: u64) -> Result<ChunkOut> {
    let ring = module.ring();
    let mut it = ring.irreducibles_in_range(n, start, end);
    let mut out = ChunkOut {
        records: Vec::new(),
        bad: Vec::new(),
    };
    while let Some((p, frob)) = it.next_with_frobenius() {
        match record_with_frobenius(module, &p, frob) {
            Ok(r) => out.records.push(r),
            Err(Error::BadReduction(_)) => out.bad.push(p),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Processes every monic irreducible of each degree in range, passing
/// records to `sink` in canonical order.
pub fn scan<F>(cfg: &ScanConfig, mut sink: F) -> Result<ScanSummary>
where
    F: FnMut(&PrimeRecord) -> Result<()>,
{
    cfg.validate()?;
    let module = &cfg.module;
    let ring = module.ring();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let batch = (cfg.threads * 8) as u64;
    let mut degrees = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        for t in &cfg.targets {
            if t.degree().is_some_and(|d| 2 * d > n) {
                warn!("target {} has degree above {n}/2; its count will be 0", ring.format(t));
            }
        }
        let pi = ring.pi_count(n)? as u64;
        let total = ring.monic_count(n).ok_or(Error::DegreeCap {
            n,
            cap: cfg.degree_cap,
        })?;
        let mut summary = DegreeSummary::new(n, pi, &cfg.targets);
        let mut start = 0;
        while start < total {
            let ranges: Vec<(u64, u64)> = (0..batch)
                .map(|i| start + i * CHUNK)
                .take_while(|&s| s < total)
                .map(|s| (s, (s + CHUNK).min(total)))
                .collect();
            start = ranges.last().unwrap().1;
            let outs: Vec<Result<ChunkOut>> =
                pool.install(|| ranges.par_iter().map(|&(s, e)| run_chunk(module, n, s, e)).collect());
            for out in outs {
                let out = out?;
                for r in &out.records {
                    summary.add(r);
                    sink(r)?;
                }
                summary.bad.extend(out.bad);
            }
        }
        if summary.good + summary.bad.len() as u64 != pi {
            return Err(Error::Inconsistent(format!(
                "degree {n}: {} good and {} bad primes, expected {pi}",
                summary.good,
                summary.bad.len()
            )));
        }
        degrees.push(summary);
    }
    Ok(ScanSummary {
        q: ring.q(),
        phi: module.to_text(),
        degrees,
    })
}

/// f_φ(n).
pub fn tabulate_cyclic(summary: &ScanSummary, n: usize) -> Option<u64> {
    summary.degree(n).map(|d| d.cyclic)
}

/// P_φ(n).
pub fn tabulate_koblitz(summary: &ScanSummary, n: usize) -> Option<u64> {
    summary.degree(n).map(|d| d.koblitz)
}

/// P_{φ,t}(n), from the observed a-values so any t can be queried.
pub fn tabulate_lang_trotter(summary: &ScanSummary, n: usize, t: &PolyA) -> Option<u64> {
    summary
        .degree(n)
        .map(|d| d.a_values.get(t).copied().unwrap_or(0))
}

/// P_{φ,t}(n)·n/q^{n/2}.
pub fn lt_ratio_report(summary: &ScanSummary, n: usize, t: &PolyA) -> Option<f64> {
    let c = tabulate_lang_trotter(summary, n, t)?;
    Some(c as f64 * n as f64 / (summary.q as f64).powf(n as f64 / 2.0))
}
