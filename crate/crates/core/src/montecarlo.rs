//! Forward simulation of Galton–Watson trajectories.
//!
//! Replication `r` draws from a ChaCha8 stream keyed by `(seed, r)`, so the
//! output depends only on the configuration and never on how replications
//! are scheduled across threads. Small generations sample each individual by
//! inverse CDF; larger ones draw the offspring-count vector as a multinomial
//! through successive binomials, which gives the same law in far fewer steps.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::offspring::OffspringLaw;

/// Default abort guard on the number of individuals in one generation.
pub const DEFAULT_POPULATION_CAP: u64 = 10_000_000;

/// Generations up to this size are sampled one individual at a time.
const PER_INDIVIDUAL_LIMIT: u64 = 16;

/// Replications handled by one parallel task.
const BLOCK: u64 = 8192;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub replications: u64,
    pub n_max: usize,
    pub z0: u64,
    pub population_cap: u64,
    /// Worker threads; 0 uses the global pool.
    #[serde(default)]
    pub jobs: usize,
}

impl SimConfig {
    pub fn new(seed: u64, replications: u64, n_max: usize) -> Self {
        Self { seed, replications, n_max, z0: 1, population_cap: DEFAULT_POPULATION_CAP, jobs: 0 }
    }

    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::OutOfRange("replications must be >= 1".into()));
        }
        if self.n_max == 0 {
            return Err(Error::OutOfRange("n_max must be >= 1".into()));
        }
        if self.z0 == 0 || self.population_cap < self.z0 {
            return Err(Error::OutOfRange(format!(
                "need 1 <= z0 <= population cap, got z0 = {}, cap = {}",
                self.z0, self.population_cap
            )));
        }
        Ok(())
    }
}

/// Observed `(Z_{n-1}, Z_n)` pairs of one generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationCounts {
    pub n: usize,
    /// `(z_prev, z, count)` sorted by `(z_prev, z)`.
    pub pairs: Vec<(u64, u64, u64)>,
    /// Replications that exceeded the population cap at or before `n`.
    pub excluded: u64,
}

impl GenerationCounts {
    pub fn recorded(&self) -> u64 {
        self.pairs.iter().map(|p| p.2).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTable {
    pub seed: u64,
    pub replications: u64,
    pub z0: u64,
    pub population_cap: u64,
    /// Entry `i` holds generation `n = i + 1`.
    pub generations: Vec<GenerationCounts>,
}

impl SimTable {
    pub fn generation(&self, n: usize) -> Result<&GenerationCounts> {
        n.checked_sub(1)
            .and_then(|i| self.generations.get(i))
            .ok_or_else(|| Error::OutOfRange(format!("generation {n} not simulated")))
    }

    /// Relative frequency of `Z_n = z` among recorded replications.
    pub fn frequency(&self, n: usize, z: u64) -> Result<f64> {
        let g = self.generation(n)?;
        let hits: u64 = g.pairs.iter().filter(|p| p.1 == z).map(|p| p.2).sum();
        Ok(hits as f64 / g.recorded().max(1) as f64)
    }
}

/// Standard error of a relative frequency `p` over `count` trials.
pub fn standard_error(p: f64, count: u64) -> f64 {
    (p * (1.0 - p) / count.max(1) as f64).sqrt()
}

/// Sampler for one offspring law, normalized to its retained mass.
struct Sampler {
    values: Vec<u64>,
    cdf: Vec<f64>,
    probs: Vec<f64>,
}

impl Sampler {
    fn new(law: &OffspringLaw) -> Self {
        let atoms = law.int_atoms();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let values: Vec<u64> = atoms.iter().map(|a| a.0).collect();
        let probs: Vec<f64> = atoms.iter().map(|a| a.1 / total).collect();
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { values, cdf, probs }
    }

    fn one(&self, rng: &mut ChaCha8Rng) -> u64 {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c <= u).min(self.values.len() - 1);
        self.values[i]
    }

    /// Total offspring of `parents` individuals, or `None` past `cap`.
    fn generation(&self, parents: u64, cap: u64, rng: &mut ChaCha8Rng) -> Option<u64> {
        if parents == 0 {
            return Some(0);
        }
        let mut total: u64 = 0;
        if parents <= PER_INDIVIDUAL_LIMIT {
            for _ in 0..parents {
                total += self.one(rng);
            }
        } else {
            let mut left = parents;
            let mut rest = 1.0;
            for (i, (&k, &p)) in self.values.iter().zip(&self.probs).enumerate() {
                if left == 0 {
                    break;
                }
                let count = if i + 1 == self.values.len() || p >= rest {
                    left
                } else {
                    Binomial::new(left, (p / rest).clamp(0.0, 1.0)).expect("valid binomial").sample(rng)
                };
                total = total.checked_add(count.checked_mul(k)?)?;
                left -= count;
                rest -= p;
            }
        }
        (total <= cap).then_some(total)
    }
}

fn replicate(sampler: &Sampler, cfg: &SimConfig, rep: u64, path: &mut Vec<u64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep);
    path.clear();
    path.push(cfg.z0);
    let mut z = cfg.z0;
    for _ in 0..cfg.n_max {
        match sampler.generation(z, cfg.population_cap, &mut rng) {
            Some(next) => {
                path.push(next);
                z = next;
            }
            None => return,
        }
    }
}

/// Sorts `(z_prev, z)` observations into counted triples.
fn tally(mut pairs: Vec<(u64, u64)>) -> Vec<(u64, u64, u64)> {
    pairs.sort_unstable();
    let mut out: Vec<(u64, u64, u64)> = Vec::new();
    for (a, b) in pairs {
        match out.last_mut() {
            Some(last) if (last.0, last.1) == (a, b) => last.2 += 1,
            _ => out.push((a, b, 1)),
        }
    }
    out
}

fn merge(a: Vec<(u64, u64, u64)>, b: Vec<(u64, u64, u64)>) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut ia, mut ib) = (a.into_iter().peekable(), b.into_iter().peekable());
    loop {
        match (ia.peek(), ib.peek()) {
            (Some(x), Some(y)) if (x.0, x.1) == (y.0, y.1) => {
                out.push((x.0, x.1, x.2 + y.2));
                ia.next();
                ib.next();
            }
            (Some(x), Some(y)) if (x.0, x.1) < (y.0, y.1) => out.push(ia.next().unwrap()),
            (Some(_), None) => out.push(ia.next().unwrap()),
            (_, Some(_)) => out.push(ib.next().unwrap()),
            (None, None) => return out,
        }
    }
}

struct Block {
    pairs: Vec<Vec<(u64, u64, u64)>>,
    excluded: Vec<u64>,
}

fn run_block(sampler: &Sampler, cfg: &SimConfig, block: u64) -> Block {
    let start = block * BLOCK;
    let end = (start + BLOCK).min(cfg.replications);
    let mut raw: Vec<Vec<(u64, u64)>> = vec![Vec::with_capacity((end - start) as usize); cfg.n_max];
    let mut excluded = vec![0; cfg.n_max];
    let mut path = Vec::with_capacity(cfg.n_max + 1);
    for rep in start..end {
        replicate(sampler, cfg, rep, &mut path);
        for n in 1..=cfg.n_max {
            if n < path.len() {
                raw[n - 1].push((path[n - 1], path[n]));
            } else {
                excluded[n - 1] += 1;
            }
        }
    }
    Block { pairs: raw.into_iter().map(tally).collect(), excluded }
}

/// Simulates `cfg.replications` independent trajectories up to `cfg.n_max`.
pub fn simulate_paths(law: &OffspringLaw, cfg: &SimConfig) -> Result<SimTable> {
    cfg.validate()?;
    let sampler = Sampler::new(law);
    if sampler.values.is_empty() {
        return Err(Error::InvalidMeasure("offspring law has no atoms".into()));
    }
    let blocks = cfg.replications.div_ceil(BLOCK);
    let work = || {
        (0..blocks)
            .into_par_iter()
            .map(|b| run_block(&sampler, cfg, b))
            .reduce_with(|mut x, y| {
                x.pairs = x.pairs.into_iter().zip(y.pairs).map(|(a, b)| merge(a, b)).collect();
                x.excluded.iter_mut().zip(&y.excluded).for_each(|(a, b)| *a += b);
                x
            })
            .expect("at least one block")
    };
    let merged = if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::OutOfRange(format!("thread pool: {e}")))?
            .install(work)
    } else {
        work()
    };
    let generations = merged
        .pairs
        .into_iter()
        .zip(merged.excluded)
        .enumerate()
        .map(|(i, (pairs, excluded))| GenerationCounts { n: i + 1, pairs, excluded })
        .collect();
    Ok(SimTable {
        seed: cfg.seed,
        replications: cfg.replications,
        z0: cfg.z0,
        population_cap: cfg.population_cap,
        generations,
    })
}

/// Empirical law of `Z_n / Z_{n-1}` (0 when `Z_{n-1} = 0`), optionally
/// restricted to replications with `Z_{n-1} > 0`.
pub fn empirical_estimator_law(table: &SimTable, n: usize, conditioned: bool) -> Result<DiscreteMeasure> {
    let g = table.generation(n)?;
    let kept: Vec<&(u64, u64, u64)> = g.pairs.iter().filter(|p| !conditioned || p.0 > 0).collect();
    let total: u64 = kept.iter().map(|p| p.2).sum();
    if total == 0 {
        if conditioned {
            return Err(Error::NullSurvival(0.0));
        }
        return Ok(DiscreteMeasure::dirac_int(0));
    }
    let atoms = kept.iter().map(|&&(j, k, c)| {
        let ratio = if j == 0 { Ratio::from_integer(0) } else { Ratio::new(k, j) };
        (ratio, c as f64 / total as f64)
    });
    DiscreteMeasure::from_atoms(atoms, 0.0)
}
