//! Monte Carlo replay of lending policies against simulated borrowers.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::analysis::NpvReport;
use crate::demand::DemandFunction;
use crate::endo_policy::GePolicy;
use crate::error::{Error, Result};
use crate::income_dist::IncomeDistribution;
use crate::numeric::NeumaierSum;

/// Paths per reduction chunk; fixed so results do not depend on thread count.
const CHUNK: usize = 4096;
const STREAM_INCOME: u64 = 0;
const STREAM_ACCEPT: u64 = 1;
const STREAMS: u64 = 2;

/// Counter-based uniform variates keyed by `(seed, path, period, stream)`.
#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { seed }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&self, path: u64, period: u64, stream: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path);
        rng.set_word_pos(((period as u128) * STREAMS as u128 + stream as u128) * 2);
        (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// A loan offer: repay `repayment` next period, principal `discount * repayment` now.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Offer {
    pub repayment: f64,
    pub discount: f64,
}

/// Offers by period; the last offer repeats forever.
#[derive(Debug, Clone)]
pub struct SimPolicy {
    pub offers: Vec<Offer>,
    /// Acceptance curve; `None` means every offer is accepted.
    pub demand: Option<DemandFunction>,
}

impl SimPolicy {
    /// Fixed-discount policy along a repayment trajectory.
    pub fn exogenous(trajectory: &[f64], d: f64) -> Result<Self> {
        if trajectory.is_empty() {
            return Err(Error::InvalidParameter("trajectory must not be empty".into()));
        }
        // a settled tail repeats its last level; keep one copy so the replay can close it analytically
        let mut len = trajectory.len();
        while len > 1 && trajectory[len - 2] == trajectory[len - 1] {
            len -= 1;
        }
        let offers = trajectory[..len].iter().map(|&y| Offer { repayment: y, discount: d }).collect();
        Ok(SimPolicy { offers, demand: None })
    }

    /// Grand Experiment followed by the stationary offer.
    pub fn grand_experiment(ge: &GePolicy, demand: DemandFunction) -> Self {
        SimPolicy {
            offers: vec![
                Offer { repayment: ge.y0, discount: ge.d0 },
                Offer { repayment: ge.y_inf, discount: ge.d_inf },
            ],
            demand: Some(demand),
        }
    }

    /// Endogenous policy from explicit `(y_t, d_t)` offers.
    pub fn endogenous(offers: Vec<Offer>, demand: DemandFunction) -> Result<Self> {
        if offers.is_empty() {
            return Err(Error::InvalidParameter("offer list must not be empty".into()));
        }
        Ok(SimPolicy { offers, demand: Some(demand) })
    }

    fn offer(&self, t: usize) -> Offer {
        self.offers[t.min(self.offers.len() - 1)]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub n_paths: usize,
    pub seed: u64,
    pub horizon: usize,
    pub rho: f64,
    /// Pairs paths with mirrored uniforms.
    pub antithetic: bool,
    /// Replays every path with this income instead of sampling.
    pub fixed_income: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { n_paths: 100_000, seed: 1, horizon: 2000, rho: 0.95, antithetic: false, fixed_income: None }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter("n_paths must be at least 1".into()));
        }
        if self.antithetic && self.n_paths % 2 == 1 {
            return Err(Error::InvalidParameter("antithetic mode needs an even number of paths".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidParameter(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        Ok(())
    }
}

/// How a single path ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathOutcome {
    pub npv: f64,
    pub default_period: Option<usize>,
    pub balk_period: Option<usize>,
}

/// Replays one borrower with income `theta`; `accept(t)` supplies the uniform
/// compared against `s(d_t)`.
pub fn replay_path<A: FnMut(usize) -> f64>(
    theta: f64,
    policy: &SimPolicy,
    rho: f64,
    horizon: usize,
    mut accept: A,
) -> PathOutcome {
    let mut npv = NeumaierSum::new();
    let mut disc = 1.0;
    let last = policy.offers.len() - 1;
    for t in 0..horizon {
        let offer = policy.offer(t);
        if let Some(dem) = &policy.demand {
            if accept(t) >= dem.s(offer.discount) {
                return PathOutcome { npv: npv.value(), default_period: None, balk_period: Some(t) };
            }
        }
        npv.add(-disc * offer.discount * offer.repayment);
        if theta < offer.repayment {
            return PathOutcome { npv: npv.value(), default_period: Some(t), balk_period: None };
        }
        npv.add(disc * rho * offer.repayment);
        disc *= rho;
        if policy.demand.is_none() && t >= last {
            // constant offers that are always repaid: close the remaining periods in one step
            let remaining = (horizon - t - 1) as i32;
            let per = (rho - offer.discount) * offer.repayment;
            npv.add(per * disc * (1.0 - rho.powi(remaining)) / (1.0 - rho));
            break;
        }
    }
    PathOutcome { npv: npv.value(), default_period: None, balk_period: None }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub n_paths: usize,
    pub mean_npv: f64,
    pub std_error: f64,
    /// `default_histogram[k]` counts paths that defaulted in period `k`.
    pub default_histogram: Vec<u64>,
    pub balked: u64,
    pub never_defaulted: u64,
}

#[derive(Default)]
struct Partial {
    sum: NeumaierSum,
    sum_sq: NeumaierSum,
    samples: u64,
    hist: Vec<u64>,
    balked: u64,
    never: u64,
}

impl Partial {
    fn record(&mut self, o: &PathOutcome) {
        match (o.default_period, o.balk_period) {
            (Some(k), _) => {
                if self.hist.len() <= k {
                    self.hist.resize(k + 1, 0);
                }
                self.hist[k] += 1;
            }
            (None, Some(_)) => self.balked += 1,
            (None, None) => self.never += 1,
        }
    }

    fn merge(&mut self, other: Partial) {
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
        self.samples += other.samples;
        if self.hist.len() < other.hist.len() {
            self.hist.resize(other.hist.len(), 0);
        }
        for (a, b) in self.hist.iter_mut().zip(&other.hist) {
            *a += b;
        }
        self.balked += other.balked;
        self.never += other.never;
    }
}

/// Simulates `n_paths` borrowers under `policy`.
///
/// In antithetic mode the standard error is computed from pair averages.
pub fn simulate_cohort(dist: &IncomeDistribution, policy: &SimPolicy, config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    if policy.offers.is_empty() {
        return Err(Error::InvalidParameter("policy has no offers".into()));
    }
    let rng = CounterRng::new(config.seed);
    let units = if config.antithetic { config.n_paths / 2 } else { config.n_paths };
    let n_chunks = units.div_ceil(CHUNK);
    let partials: Vec<Partial> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut part = Partial::default();
            for unit in (c * CHUNK)..((c + 1) * CHUNK).min(units) {
                let run = |mirror: bool| {
                    let flip = |u: f64| if mirror { 1.0 - u } else { u };
                    let theta = match config.fixed_income {
                        Some(th) => th,
                        None => dist.sample_from_uniform(flip(rng.uniform(unit as u64, 0, STREAM_INCOME))),
                    };
                    replay_path(theta, policy, config.rho, config.horizon, |t| {
                        flip(rng.uniform(unit as u64, t as u64, STREAM_ACCEPT))
                    })
                };
                let sample = if config.antithetic {
                    let (a, b) = (run(false), run(true));
                    part.record(&a);
                    part.record(&b);
                    0.5 * (a.npv + b.npv)
                } else {
                    let a = run(false);
                    part.record(&a);
                    a.npv
                };
                part.sum.add(sample);
                part.sum_sq.add(sample * sample);
                part.samples += 1;
            }
            part
        })
        .collect();
    let mut total = Partial::default();
    for p in partials {
        total.merge(p);
    }
    let n = total.samples as f64;
    let mean = total.sum.value() / n;
    let var = if total.samples > 1 { ((total.sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(SimResult {
        n_paths: config.n_paths,
        mean_npv: mean,
        std_error: (var / n).sqrt(),
        default_histogram: total.hist,
        balked: total.balked,
        never_defaulted: total.never,
    })
}

/// One default-period bin of [`empirical_segments`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentBin {
    /// First default period in the bin; `None` for borrowers who never default.
    pub period: Option<usize>,
    /// Last default period pooled into the bin.
    pub last_period: Option<usize>,
    pub observed: u64,
    pub expected_prob: f64,
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentComparison {
    pub bins: Vec<SegmentBin>,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    /// Critical value at significance 1e-3.
    pub critical_value: f64,
    pub all_within_3_sigma: bool,
    pub passes_chi_square: bool,
}

/// Compares simulated default periods with the masses `F(y_k) - F(y_{k-1})`
/// implied by the trajectory in `report`. Bins expecting fewer than five
/// paths are pooled with their neighbours.
pub fn empirical_segments(sim: &SimResult, report: &NpvReport, dist: &IncomeDistribution) -> Result<SegmentComparison> {
    let n = (sim.n_paths as u64 - sim.balked) as f64;
    if n <= 0.0 {
        return Err(Error::InvalidParameter("no completed paths to compare".into()));
    }
    let traj = &report.trajectory;
    let cdf = |y: f64| 1.0 - dist.survival(y);
    // periods after the trajectory settles repeat the last level and carry no mass
    let mut raw: Vec<(usize, u64, f64)> = Vec::new();
    let mut prev = 0.0;
    for (k, &y) in traj.iter().enumerate() {
        let p = cdf(y) - cdf(prev);
        let obs = sim.default_histogram.get(k).copied().unwrap_or(0);
        raw.push((k, obs, p.max(0.0)));
        prev = y.max(prev);
    }
    let beyond: u64 = sim.default_histogram.iter().skip(traj.len()).sum();
    let never_p = dist.survival(prev);
    let mut bins = Vec::new();
    let mut acc: Option<(usize, usize, u64, f64)> = None;
    for (k, obs, p) in raw {
        let cur = match acc {
            Some((start, _, o, q)) => (start, k, o + obs, q + p),
            None => (k, k, obs, p),
        };
        if cur.3 * n >= 5.0 {
            bins.push(make_bin(Some(cur.0), Some(cur.1), cur.2, cur.3, n));
            acc = None;
        } else {
            acc = Some(cur);
        }
    }
    let mut never_obs = sim.never_defaulted + beyond;
    let mut never_prob = never_p;
    if let Some((_, _, o, q)) = acc {
        never_obs += o;
        never_prob += q;
    }
    bins.push(make_bin(None, None, never_obs, never_prob, n));
    let chi: f64 = bins
        .iter()
        .filter(|b| b.expected_prob > 0.0)
        .map(|b| {
            let e = b.expected_prob * n;
            (b.observed as f64 - e).powi(2) / e
        })
        .sum();
    let dof = bins.len().saturating_sub(1).max(1);
    let critical =
        ChiSquared::new(dof as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?.inverse_cdf(1.0 - 1e-3);
    Ok(SegmentComparison {
        all_within_3_sigma: bins.iter().all(|b| b.z_score.abs() <= 3.0),
        passes_chi_square: chi <= critical,
        bins,
        chi_square: chi,
        degrees_of_freedom: dof,
        critical_value: critical,
    })
}

fn make_bin(period: Option<usize>, last: Option<usize>, observed: u64, p: f64, n: f64) -> SegmentBin {
    let sd = (n * p * (1.0 - p)).sqrt();
    let z = if sd > 0.0 {
        (observed as f64 - n * p) / sd
    } else if observed == 0 {
        0.0
    } else {
        f64::INFINITY
    };
    SegmentBin { period, last_period: last, observed, expected_prob: p, z_score: z }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_rng_is_keyed() {
        let r = CounterRng::new(7);
        assert_eq!(r.uniform(3, 4, 0), r.uniform(3, 4, 0));
        assert_ne!(r.uniform(3, 4, 0), r.uniform(3, 4, 1));
        assert_ne!(r.uniform(3, 4, 0), r.uniform(4, 4, 0));
        assert_ne!(r.uniform(3, 4, 0), CounterRng::new(8).uniform(3, 4, 0));
    }

    #[test]
    fn safe_path_closes_with_geometric_tail() {
        let policy = SimPolicy::exogenous(&[0.4], 0.8).unwrap();
        let out = replay_path(0.9, &policy, 0.95, 2000, |_| 0.0);
        let exact = (0.95 - 0.8) * 0.4 * (1.0 - 0.95f64.powi(2000)) / 0.05;
        assert!((out.npv - exact).abs() < 1e-12);
        assert_eq!(out.default_period, None);
    }

    #[test]
    fn default_in_first_period_loses_principal() {
        let policy = SimPolicy::exogenous(&[0.3, 0.5], 0.8).unwrap();
        let out = replay_path(0.1, &policy, 0.95, 2000, |_| 0.0);
        assert_eq!(out.default_period, Some(0));
        assert!((out.npv + 0.8 * 0.3).abs() < 1e-15);
    }
}
