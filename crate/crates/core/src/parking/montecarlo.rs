//! Parking on critical geometric Galton-Watson trees.
//!
//! Offspring law `ν_k = 2^{-k-1}`, cars i.i.d. with law `b`. A fixed plane
//! tree with `n` vertices has probability `Π_v 2^{-(c_v+1)} = 2^{-(2n-1)}`,
//! since the child counts sum to `n - 1`. Multiplying by the label
//! probabilities `Π b_ℓ(v)` and summing over fully packed trees gives
//!
//! `P(fully parked, |V| = n, overflow = p) = 2·4^{-n}·F_{n,p}`.
//!
//! Samples are drawn in fixed chunks of `CHUNK` trees, chunk `k` using the
//! ChaCha8 stream `k` of the seed, so the result depends on the seed only
//! and not on how chunks are spread over workers.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;
use serde::Serialize;

use super::{ParkingError, Result};
use crate::exec::Exec;
use crate::weights::WeightSequence;

pub const CHUNK: u64 = 1 << 16;
pub const DEFAULT_SIZE_CAP: usize = 10_000;
/// Label laws with infinite support are cut where the remaining mass
/// drops below this.
const TAIL_MASS: f64 = 1e-16;

#[derive(Clone, Debug)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    /// Largest `n` tabulated.
    pub n_max: usize,
    /// Largest overflow tabulated.
    pub p_max: usize,
    /// Trees growing beyond this many vertices are abandoned and counted
    /// as censored.
    pub size_cap: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    pub n: usize,
    pub p: usize,
    pub count: u64,
    pub probability: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct McReport {
    pub samples: u64,
    pub seed: u64,
    pub censored: u64,
    pub size_cap: usize,
    /// Fully parked trees with `|V| = n <= n_max` and overflow `p <= p_max`.
    pub cells: Vec<Cell>,
    /// Sizes of occupied clusters over all uncensored trees.
    pub cluster_sizes: BTreeMap<usize, u64>,
}

impl McReport {
    pub fn cell(&self, n: usize, p: usize) -> Option<&Cell> {
        self.cells.iter().find(|c| c.n == n && c.p == p)
    }
}

#[derive(Clone, Debug, Default)]
struct Tally {
    counts: Vec<u64>,
    censored: u64,
    clusters: BTreeMap<usize, u64>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        if self.counts.is_empty() {
            return other;
        }
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.censored += other.censored;
        for (k, v) in other.clusters {
            *self.clusters.entry(k).or_insert(0) += v;
        }
        self
    }
}

/// Label law as `f64` weights over `0..len`.
fn label_weights(ws: &WeightSequence) -> Result<Vec<f64>> {
    if !ws.is_probability(128) {
        return Err(ParkingError::NotProbability);
    }
    let mut w = Vec::new();
    let mut mass = 0.0;
    for l in 0.. {
        let b = ws.coeff_float(l, 64).to_f64();
        w.push(b);
        mass += b;
        if let Some(d) = ws.degree() {
            if l >= d {
                break;
            }
        } else if 1.0 - mass < TAIL_MASS || l > 1_000_000 {
            break;
        }
    }
    Ok(w)
}

struct Sampler<'a> {
    labels: &'a WeightedIndex<f64>,
    parent: Vec<usize>,
    label: Vec<u32>,
    chi: Vec<u64>,
}

impl Sampler<'_> {
    /// Grows one tree breadth-first; `false` when it exceeds `cap`.
    fn grow<R: Rng>(&mut self, rng: &mut R, cap: usize) -> bool {
        self.parent.clear();
        self.parent.push(0);
        let mut v = 0;
        while v < self.parent.len() {
            // P(k children) = 2^{-k-1}
            let k = rng.next_u64().trailing_zeros() as usize;
            if self.parent.len() + k > cap {
                return false;
            }
            self.parent.extend(std::iter::repeat_n(v, k));
            v += 1;
        }
        let n = self.parent.len();
        self.label.clear();
        self.label.extend((0..n).map(|_| self.labels.sample(rng) as u32));
        true
    }

    fn park(&mut self) -> (bool, u64) {
        let n = self.parent.len();
        self.chi.clear();
        self.chi.extend(self.label.iter().map(|&l| l as u64));
        let mut full = true;
        for v in (1..n).rev() {
            if self.chi[v] == 0 {
                full = false;
            }
            let out = self.chi[v].saturating_sub(1);
            self.chi[self.parent[v]] += out;
        }
        full &= self.chi[0] >= 1;
        (full, self.chi[0].saturating_sub(1))
    }

    fn clusters(&self, into: &mut BTreeMap<usize, u64>) {
        let n = self.parent.len();
        // sizes accumulate bottom-up into the top vertex of each cluster
        let mut size: Vec<usize> = self.chi.iter().map(|&c| (c >= 1) as usize).collect();
        for v in (1..n).rev() {
            if size[v] > 0 && self.chi[self.parent[v]] >= 1 {
                size[self.parent[v]] += size[v];
                size[v] = 0;
            }
        }
        for s in size.into_iter().filter(|&s| s > 0) {
            *into.entry(s).or_insert(0) += 1;
        }
    }
}

/// Empirical `P(fully parked, |V| = n, overflow = p)` with binomial
/// standard errors.
pub fn gw_parking_mc(ws: &WeightSequence, cfg: &McConfig, exec: Exec) -> Result<McReport> {
    if cfg.samples == 0 || cfg.n_max == 0 {
        return Err(ParkingError::Precondition("need samples >= 1 and n_max >= 1".into()));
    }
    let weights = label_weights(ws)?;
    let dist = WeightedIndex::new(&weights).map_err(|e| ParkingError::Precondition(e.to_string()))?;
    let width = cfg.p_max + 1;
    let chunks = cfg.samples.div_ceil(CHUNK);
    let tally = exec.map_reduce(
        0..chunks as usize,
        |k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let todo = CHUNK.min(cfg.samples - k as u64 * CHUNK);
            let mut s = Sampler { labels: &dist, parent: Vec::new(), label: Vec::new(), chi: Vec::new() };
            let mut t = Tally { counts: vec![0; cfg.n_max * width], ..Default::default() };
            for _ in 0..todo {
                if !s.grow(&mut rng, cfg.size_cap) {
                    t.censored += 1;
                    continue;
                }
                let (full, overflow) = s.park();
                let n = s.parent.len();
                if full && n <= cfg.n_max && (overflow as usize) <= cfg.p_max {
                    t.counts[(n - 1) * width + overflow as usize] += 1;
                }
                s.clusters(&mut t.clusters);
            }
            t
        },
        Tally::default,
        Tally::merge,
    );
    let total = cfg.samples as f64;
    let cells = (1..=cfg.n_max)
        .flat_map(|n| (0..width).map(move |p| (n, p)))
        .map(|(n, p)| {
            let count = tally.counts.get((n - 1) * width + p).copied().unwrap_or(0);
            let prob = count as f64 / total;
            Cell { n, p, count, probability: prob, std_error: (prob * (1.0 - prob) / total).sqrt() }
        })
        .collect();
    Ok(McReport {
        samples: cfg.samples,
        seed: cfg.seed,
        censored: tally.censored,
        size_cap: cfg.size_cap,
        cells,
        cluster_sizes: tally.clusters,
    })
}

/// `2·4^{-n}·F_{n,p}`.
pub fn exact_probability(f_np: &Rational, n: usize) -> Rational {
    let mut r = Rational::from(f_np * 2u32);
    for _ in 0..n {
        r /= 4u32;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(samples: u64, seed: u64) -> McConfig {
        McConfig { samples, seed, n_max: 4, p_max: 3, size_cap: DEFAULT_SIZE_CAP }
    }

    #[test]
    fn one_car_each_always_parks() {
        let ws = WeightSequence::polynomial_i64(&[0, 1]);
        let r = gw_parking_mc(&ws, &cfg(20_000, 1), Exec::Parallel).unwrap();
        // every tree is fully parked with overflow 0; P(|V| = 1) = 1/2
        assert!(r.cells.iter().filter(|c| c.p > 0).all(|c| c.count == 0));
        let p1 = r.cell(1, 0).unwrap().probability;
        assert!((p1 - 0.5).abs() < 0.02);
    }

    #[test]
    fn seeded_runs_are_reproducible_across_modes() {
        let ws = WeightSequence::Polynomial(vec![Rational::from((1, 2)), Rational::new(), Rational::from((1, 2))]);
        let a = gw_parking_mc(&ws, &cfg(150_000, 7), Exec::Parallel).unwrap();
        let b = gw_parking_mc(&ws, &cfg(150_000, 7), Exec::Sequential).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = gw_parking_mc(&ws, &cfg(150_000, 8), Exec::Sequential).unwrap();
        assert_ne!(a.cell(1, 1).unwrap().count, c.cell(1, 1).unwrap().count);
    }

    #[test]
    fn rejects_non_probability() {
        let ws = WeightSequence::polynomial_i64(&[1, 1]);
        assert!(matches!(gw_parking_mc(&ws, &cfg(10, 1), Exec::Sequential), Err(ParkingError::NotProbability)));
    }

    #[test]
    fn exact_probability_of_single_vertex() {
        // F_{1,0} = b_1; P(|V| = 1) = 1/2
        assert_eq!(exact_probability(&Rational::from((1, 3)), 1), Rational::from((1, 6)));
    }
}
