//! Brownian path generation and coupled Euler-Maruyama simulation.
//!
//! Every path owns an independent random stream keyed by `(seed, path_index)`,
//! so Monte Carlo results are bitwise identical regardless of execution order
//! or worker count. Reductions over per-path samples use pairwise summation
//! in path order for the same reason.

use crate::coefficients::DiffusionSpec;
use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimConfig {
    /// Start point, interior of the half line.
    pub x0: f64,
    /// Time horizon.
    pub t_horizon: f64,
    /// Uniform grid steps; spacing is `t_horizon / steps`.
    pub steps: usize,
    /// Monte Carlo path count.
    pub paths: usize,
    /// Master seed; fully determines all randomness.
    pub seed: u64,
    /// Freeze paths at 0 once they cross it. Valid as an exact absorption
    /// only when `σ(0) = 0`; keep it off for shifted or full-line
    /// coefficients.
    pub absorb_at_zero: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.x0 > 0.0 && self.x0.is_finite()) {
            return Err(Error::Config(format!("x0 must be > 0, got {}", self.x0)));
        }
        if !(self.t_horizon > 0.0 && self.t_horizon.is_finite()) {
            return Err(Error::Config(format!(
                "t_horizon must be > 0, got {}",
                self.t_horizon
            )));
        }
        if self.steps == 0 {
            return Err(Error::Config("steps must be >= 1".into()));
        }
        if self.paths == 0 {
            return Err(Error::Config("paths must be >= 1".into()));
        }
        Ok(())
    }

    pub fn step_size(&self) -> f64 {
        self.t_horizon / self.steps as f64
    }

    /// Default absorption policy: freeze at 0 exactly when the coefficient
    /// declares `σ(0) = 0` and carries no shift.
    pub fn default_absorption(spec: &DiffusionSpec) -> bool {
        spec.base_vanishes_at_zero() && spec.shift() == 0.0
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent random stream for one path, keyed by `(seed, path_index)`.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut state = seed;
    let s0 = splitmix64(&mut state);
    let mut s = s0 ^ path_index.wrapping_mul(0xA24B_AED4_963E_E407);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// `steps` i.i.d. Gaussian(0, h) increments for one path.
pub fn brownian_increments(seed: u64, path_index: u64, steps: usize, h: f64) -> Vec<f64> {
    let mut rng = path_rng(seed, path_index);
    let sqrt_h = h.sqrt();
    (0..steps)
        .map(|_| sqrt_h * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// One Euler-Maruyama trajectory on the full grid.
#[derive(Debug, Clone)]
pub struct SimulatedPath {
    /// Grid values including the start point (`steps + 1` entries).
    pub values: Vec<f64>,
    pub absorption_time: Option<f64>,
}

/// Explicit Euler-Maruyama: `X_{k+1} = X_k + σ(X_k) ΔB_k`, optionally frozen
/// at 0 after the first nonpositive state.
pub fn euler_maruyama(
    sigma: &DiffusionSpec,
    cfg: &SimConfig,
    increments: &[f64],
) -> Result<SimulatedPath> {
    cfg.validate()?;
    if increments.len() != cfg.steps {
        return Err(Error::Config(format!(
            "expected {} increments, got {}",
            cfg.steps,
            increments.len()
        )));
    }
    let h = cfg.step_size();
    let mut values = Vec::with_capacity(cfg.steps + 1);
    values.push(cfg.x0);
    let mut x = cfg.x0;
    let mut absorption_time = None;
    for (k, &db) in increments.iter().enumerate() {
        if absorption_time.is_none() {
            x += sigma.eval(x) * db;
            if !x.is_finite() {
                return Err(Error::NonFiniteState { step: k + 1 });
            }
            if cfg.absorb_at_zero && x <= 0.0 {
                x = 0.0;
                absorption_time = Some((k + 1) as f64 * h);
            }
        }
        values.push(x);
    }
    Ok(SimulatedPath {
        values,
        absorption_time,
    })
}

/// Coupled error of one path pair driven by the same increments.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoupledErrorSample {
    pub path_index: u64,
    /// Max over the grid of `|X - X_n|`.
    pub sup_error: f64,
    pub terminal_error: f64,
    pub absorption_time_x: Option<f64>,
    pub absorption_time_xn: Option<f64>,
}

/// Runs the Euler scheme for `σ` and `σ_n` on the same increment stream and
/// records sup and terminal absolute differences over the grid.
pub fn coupled_error(
    sigma: &DiffusionSpec,
    sigma_n: &DiffusionSpec,
    cfg: &SimConfig,
    path_index: u64,
) -> Result<CoupledErrorSample> {
    cfg.validate()?;
    let h = cfg.step_size();
    let sqrt_h = h.sqrt();
    let mut rng = path_rng(cfg.seed, path_index);
    let mut x = cfg.x0;
    let mut xn = cfg.x0;
    let mut absorbed_x = None;
    let mut absorbed_xn = None;
    let mut sup = 0.0f64;
    for k in 0..cfg.steps {
        let db = sqrt_h * rng.sample::<f64, _>(StandardNormal);
        if absorbed_x.is_none() {
            x += sigma.eval(x) * db;
            if !x.is_finite() {
                return Err(Error::NonFiniteState { step: k + 1 });
            }
            if cfg.absorb_at_zero && x <= 0.0 {
                x = 0.0;
                absorbed_x = Some((k + 1) as f64 * h);
            }
        }
        if absorbed_xn.is_none() {
            xn += sigma_n.eval(xn) * db;
            if !xn.is_finite() {
                return Err(Error::NonFiniteState { step: k + 1 });
            }
            if cfg.absorb_at_zero && xn <= 0.0 {
                xn = 0.0;
                absorbed_xn = Some((k + 1) as f64 * h);
            }
        }
        let d = (x - xn).abs();
        if d > sup {
            sup = d;
        }
        if absorbed_x.is_some() && absorbed_xn.is_some() {
            // Both frozen at 0; the difference stays 0 for good.
            break;
        }
    }
    Ok(CoupledErrorSample {
        path_index,
        sup_error: sup,
        terminal_error: (x - xn).abs(),
        absorption_time_x: absorbed_x,
        absorption_time_xn: absorbed_xn,
    })
}

/// Statistic aggregated over coupled-error samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    MeanSup,
    MeanSupSquared,
    MeanAbsTerminal,
}

impl Statistic {
    pub fn apply(&self, sample: &CoupledErrorSample) -> f64 {
        match self {
            Statistic::MeanSup => sample.sup_error,
            Statistic::MeanSupSquared => sample.sup_error * sample.sup_error,
            Statistic::MeanAbsTerminal => sample.terminal_error,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
    pub statistic: Statistic,
}

/// Pairwise (cascade) summation: deterministic for a fixed slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// All coupled-error samples, in path order. Paths run in parallel; the
/// output is independent of the worker count.
pub fn mc_samples(
    sigma: &DiffusionSpec,
    sigma_n: &DiffusionSpec,
    cfg: &SimConfig,
) -> Result<Vec<CoupledErrorSample>> {
    cfg.validate()?;
    (0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| coupled_error(sigma, sigma_n, cfg, i))
        .collect()
}

/// Monte Carlo aggregate of the configured statistic.
pub fn mc_estimate(
    sigma: &DiffusionSpec,
    sigma_n: &DiffusionSpec,
    cfg: &SimConfig,
    statistic: Statistic,
) -> Result<MCEstimate> {
    if cfg.paths < 2 {
        return Err(Error::Config("paths must be >= 2 for an estimate".into()));
    }
    let values: Vec<f64> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| coupled_error(sigma, sigma_n, cfg, i).map(|s| statistic.apply(&s)))
        .collect::<Result<_>>()?;
    let (mean, std_error) = mean_and_stderr(&values);
    Ok(MCEstimate {
        mean,
        std_error,
        count: cfg.paths,
        statistic,
    })
}

/// Terminal state of a single (uncoupled) path.
#[derive(Debug, Clone, Copy)]
pub struct TerminalSample {
    pub value: f64,
    pub absorption_time: Option<f64>,
}

/// Simulates single paths and returns the state at grid index `at_step`
/// (defaults to the horizon when `None`).
pub fn terminal_values(
    sigma: &DiffusionSpec,
    cfg: &SimConfig,
    at_step: Option<usize>,
) -> Result<Vec<TerminalSample>> {
    cfg.validate()?;
    let stop = at_step.unwrap_or(cfg.steps);
    if stop == 0 || stop > cfg.steps {
        return Err(Error::Config(format!(
            "observation step {stop} outside 1..={}",
            cfg.steps
        )));
    }
    (0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| {
            let h = cfg.step_size();
            let sqrt_h = h.sqrt();
            let mut rng = path_rng(cfg.seed, i);
            let mut x = cfg.x0;
            let mut absorbed = None;
            for k in 0..stop {
                let db = sqrt_h * rng.sample::<f64, _>(StandardNormal);
                if absorbed.is_none() {
                    x += sigma.eval(x) * db;
                    if !x.is_finite() {
                        return Err(Error::NonFiniteState { step: k + 1 });
                    }
                    if cfg.absorb_at_zero && x <= 0.0 {
                        x = 0.0;
                        absorbed = Some((k + 1) as f64 * h);
                    }
                }
            }
            Ok(TerminalSample {
                value: x,
                absorption_time: absorbed,
            })
        })
        .collect()
}

/// States of each path at three grid indices `k_minus < k_mid < k_plus`,
/// from a common ensemble (common random numbers).
pub fn triple_values(
    sigma: &DiffusionSpec,
    cfg: &SimConfig,
    k_minus: usize,
    k_mid: usize,
    k_plus: usize,
) -> Result<Vec<[f64; 3]>> {
    cfg.validate()?;
    if !(k_minus < k_mid && k_mid < k_plus && k_plus <= cfg.steps) {
        return Err(Error::Config(format!(
            "need 0 <= {k_minus} < {k_mid} < {k_plus} <= {}",
            cfg.steps
        )));
    }
    (0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| {
            let h = cfg.step_size();
            let sqrt_h = h.sqrt();
            let mut rng = path_rng(cfg.seed, i);
            let mut x = cfg.x0;
            let mut absorbed = false;
            let mut out = [0.0f64; 3];
            for k in 0..k_plus {
                let db = sqrt_h * rng.sample::<f64, _>(StandardNormal);
                if !absorbed {
                    x += sigma.eval(x) * db;
                    if !x.is_finite() {
                        return Err(Error::NonFiniteState { step: k + 1 });
                    }
                    if cfg.absorb_at_zero && x <= 0.0 {
                        x = 0.0;
                        absorbed = true;
                    }
                }
                if k + 1 == k_minus {
                    out[0] = x;
                }
                if k + 1 == k_mid {
                    out[1] = x;
                }
                if k + 1 == k_plus {
                    out[2] = x;
                }
            }
            if k_minus == 0 {
                out[0] = cfg.x0;
            }
            Ok(out)
        })
        .collect()
}
