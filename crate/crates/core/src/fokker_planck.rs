//! Monte Carlo density estimation for the law of `X(t)` and a weak-form
//! check of the forward equation `∂_t v = ½ ∂²_x (σ(x)² v)`.
//!
//! The law of the absorbed process splits into an atom at 0 plus a density
//! on `(0, ∞)`. The density is estimated by a boundary-reflected kernel
//! estimator on the surviving samples; the atom is reported separately.
//! The forward equation is tested in its weak (Itô) form
//! `d/dt E[φ(X_t)] = E[½ σ(X_t)² φ''(X_t)]` for compactly supported test
//! functions, with a symmetric time difference on a common path ensemble.

use crate::coefficients::DiffusionSpec;
use crate::error::{Error, Result};
use crate::simulate::{mean_and_stderr, terminal_values, triple_values, SimConfig};
use serde::Serialize;
use std::sync::Arc;

// --- kernel density with boundary reflection -------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct DensityEstimate {
    /// Observation time actually used (nearest grid time).
    pub t: f64,
    pub x0: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Fraction of paths absorbed at 0 by time `t`.
    pub atom_at_zero: f64,
    pub bandwidth: f64,
    pub paths: usize,
}

impl DensityEstimate {
    /// `atom + ∫ p̂ dy` by the trapezoid rule on the output grid.
    pub fn mass_balance(&self) -> f64 {
        let mut integral = 0.0;
        for w in self.grid.windows(2).zip(self.values.windows(2)) {
            integral += 0.5 * (w.0[1] - w.0[0]) * (w.1[0] + w.1[1]);
        }
        self.atom_at_zero + integral
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < n {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[n - 1]
    }
}

/// Silverman's rule of thumb, `0.9 min(sd, IQR/1.34) n^{-1/5}`.
fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n < 2 {
        return 0.0;
    }
    let (mean, _) = mean_and_stderr(sorted);
    let var = sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    let spread = if iqr > 0.0 {
        sd.min(iqr / 1.34)
    } else {
        sd
    };
    0.9 * spread * (n as f64).powf(-0.2)
}

#[inline]
fn epanechnikov(u: f64) -> f64 {
    if u.abs() < 1.0 {
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

/// Estimates the density of `X(t)` on `grid` (nonnegative points).
///
/// Absorbed paths form the atom; surviving samples enter an Epanechnikov
/// kernel estimate with reflection at 0 so mass near the boundary is not
/// lost. The bandwidth defaults to Silverman's rule floored at twice the
/// grid spacing.
pub fn density_estimate(
    sigma: &DiffusionSpec,
    cfg: &SimConfig,
    t: f64,
    grid: &[f64],
    bandwidth: Option<f64>,
) -> Result<DensityEstimate> {
    cfg.validate()?;
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 0.0 {
        return Err(Error::Config(
            "density grid must be >= 0 and strictly increasing with >= 2 points".into(),
        ));
    }
    let step = observation_step(cfg, t)?;
    let t_actual = step as f64 * cfg.step_size();
    let samples = terminal_values(sigma, cfg, Some(step))?;
    let mut survivors: Vec<f64> = samples
        .iter()
        .filter(|s| s.absorption_time.is_none())
        .map(|s| s.value)
        .collect();
    let absorbed = samples.len() - survivors.len();
    let atom_at_zero = absorbed as f64 / samples.len() as f64;
    survivors.sort_by(f64::total_cmp);

    let spacing = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    let floor = 2.0 * spacing;
    let h = match bandwidth {
        Some(h) if h > 0.0 => h,
        Some(h) => {
            return Err(Error::Config(format!("bandwidth must be positive, got {h}")))
        }
        None => silverman_bandwidth(&survivors).max(floor),
    };

    let norm = 1.0 / (samples.len() as f64 * h);
    let values: Vec<f64> = grid
        .iter()
        .map(|&y| {
            if survivors.is_empty() {
                return 0.0;
            }
            let lo = survivors.partition_point(|&x| x < y - h);
            let hi = survivors.partition_point(|&x| x <= y + h);
            let mut acc = 0.0;
            for &x in &survivors[lo..hi] {
                acc += epanechnikov((y - x) / h);
            }
            // reflected images -x contribute where y + x < h
            if y < h {
                let hi_r = survivors.partition_point(|&x| x <= h - y);
                for &x in &survivors[..hi_r] {
                    acc += epanechnikov((y + x) / h);
                }
            }
            acc * norm
        })
        .collect();

    Ok(DensityEstimate {
        t: t_actual,
        x0: cfg.x0,
        grid: grid.to_vec(),
        values,
        atom_at_zero,
        bandwidth: h,
        paths: samples.len(),
    })
}

fn observation_step(cfg: &SimConfig, t: f64) -> Result<usize> {
    if !(t > 0.0 && t <= cfg.t_horizon * (1.0 + 1e-12)) {
        return Err(Error::Config(format!(
            "observation time {t} outside (0, {}]",
            cfg.t_horizon
        )));
    }
    let step = (t / cfg.step_size()).round() as usize;
    Ok(step.clamp(1, cfg.steps))
}

// --- test functions ---------------------------------------------------------

/// Twice continuously differentiable test function with compact support in
/// `(0, ∞)`.
#[derive(Debug, Clone, Serialize)]
pub enum TestFunction {
    /// `exp(1 - 1/(1-u²))` with `u = (x-center)/radius`; support
    /// `(center-radius, center+radius)`.
    Bump { center: f64, radius: f64 },
    /// 1 on `[flat_lo, flat_hi]` with quintic smoothstep shoulders of width
    /// `shoulder` on both sides.
    Plateau {
        flat_lo: f64,
        flat_hi: f64,
        shoulder: f64,
    },
}

fn smoothstep(u: f64) -> f64 {
    // C² step: 0 at 0, 1 at 1
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

fn smoothstep_d2(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    60.0 * u + u * u * (-180.0 + 120.0 * u)
}

impl TestFunction {
    pub fn bump(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && center - radius >= 0.0) {
            return Err(Error::Config(format!(
                "bump support (center {center}, radius {radius}) must sit inside (0, ∞)"
            )));
        }
        Ok(TestFunction::Bump { center, radius })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Bump { center, radius } => {
                let u = (x - center) / radius;
                let w = 1.0 - u * u;
                if w <= 0.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / w).exp()
                }
            }
            TestFunction::Plateau {
                flat_lo,
                flat_hi,
                shoulder,
            } => {
                if x < flat_lo {
                    smoothstep((x - (flat_lo - shoulder)) / shoulder)
                } else if x > flat_hi {
                    smoothstep(((flat_hi + shoulder) - x) / shoulder)
                } else {
                    1.0
                }
            }
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Bump { center, radius } => {
                let u = (x - center) / radius;
                let w = 1.0 - u * u;
                if w <= 0.0 {
                    return 0.0;
                }
                let g = (1.0 - 1.0 / w).exp();
                let w2 = w * w;
                g * (4.0 * u * u / (w2 * w2) - 2.0 / w2 - 8.0 * u * u / (w2 * w))
                    / (radius * radius)
            }
            TestFunction::Plateau {
                flat_lo,
                flat_hi,
                shoulder,
            } => {
                if x < flat_lo {
                    smoothstep_d2((x - (flat_lo - shoulder)) / shoulder) / (shoulder * shoulder)
                } else if x > flat_hi {
                    smoothstep_d2(((flat_hi + shoulder) - x) / shoulder) / (shoulder * shoulder)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            TestFunction::Bump { center, radius } => format!("bump(c={center}, r={radius})"),
            TestFunction::Plateau {
                flat_lo, flat_hi, ..
            } => format!("plateau([{flat_lo}, {flat_hi}])"),
        }
    }
}

/// Three bumps around the start point.
pub fn default_test_set(x0: f64) -> Vec<TestFunction> {
    vec![
        TestFunction::bump(0.5 * x0, 0.35 * x0).expect("valid support"),
        TestFunction::bump(x0, 0.6 * x0).expect("valid support"),
        TestFunction::bump(2.0 * x0, 1.2 * x0).expect("valid support"),
    ]
}

// --- weak residual -----------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct WeakResidualReport {
    pub test_functions: Vec<String>,
    pub residuals: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Per-function tolerance `max(5 stderr, floor)`.
    pub tolerances: Vec<f64>,
    pub tolerance_floor: f64,
    pub dt: f64,
    pub pass: bool,
}

/// Monte Carlo residual of the weak forward equation at time `t`:
/// `[E φ(X_{t+dt}) - E φ(X_{t-dt})]/(2 dt) - E[½ σ(X_t)² φ''(X_t)]`,
/// all three expectations from the same path ensemble.
pub fn weak_residual(
    sigma: &DiffusionSpec,
    cfg: &SimConfig,
    t: f64,
    dt: f64,
    test_set: &[TestFunction],
    tolerance_floor: f64,
) -> Result<WeakResidualReport> {
    cfg.validate()?;
    if test_set.is_empty() {
        return Err(Error::Config("empty test-function set".into()));
    }
    if !(dt > 0.0 && t - dt > 0.0 && t + dt <= cfg.t_horizon * (1.0 + 1e-12)) {
        return Err(Error::Config(format!(
            "need 0 < t - dt and t + dt <= horizon, got t = {t}, dt = {dt}"
        )));
    }
    let h = cfg.step_size();
    let k_mid = observation_step(cfg, t)?;
    let offset = (dt / h).round().max(1.0) as usize;
    if offset >= k_mid {
        return Err(Error::Config(format!(
            "dt = {dt} does not leave a positive earlier time at step size {h}"
        )));
    }
    let (k_minus, k_plus) = (k_mid - offset, k_mid + offset);
    if k_plus > cfg.steps {
        return Err(Error::Config(format!(
            "t + dt lands beyond the grid ({k_plus} > {})",
            cfg.steps
        )));
    }
    let dt_actual = offset as f64 * h;
    let triples = triple_values(sigma, cfg, k_minus, k_mid, k_plus)?;

    let mut residuals = Vec::with_capacity(test_set.len());
    let mut std_errors = Vec::with_capacity(test_set.len());
    let mut tolerances = Vec::with_capacity(test_set.len());
    let mut pass = true;
    for phi in test_set {
        let per_path: Vec<f64> = triples
            .iter()
            .map(|&[xm, x0, xp]| {
                let time_term = (phi.eval(xp) - phi.eval(xm)) / (2.0 * dt_actual);
                let s = sigma.eval(x0);
                time_term - 0.5 * s * s * phi.second_derivative(x0)
            })
            .collect();
        let (mean, stderr) = mean_and_stderr(&per_path);
        let tol = (5.0 * stderr).max(tolerance_floor);
        if mean.abs() > tol {
            pass = false;
        }
        residuals.push(mean);
        std_errors.push(stderr);
        tolerances.push(tol);
    }
    Ok(WeakResidualReport {
        test_functions: test_set.iter().map(|t| t.describe()).collect(),
        residuals,
        std_errors,
        tolerances,
        tolerance_floor,
        dt: dt_actual,
        pass,
    })
}

// --- smoothed solution ---------------------------------------------------------

/// Initial datum of polynomial growth, `|f(y)| <= L (1 + |y|)^{2r}`.
#[derive(Clone)]
pub struct PolyGrowth {
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub growth_constant: f64,
    pub growth_power: f64,
}

impl PolyGrowth {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        growth_constant: f64,
        growth_power: f64,
    ) -> Self {
        PolyGrowth {
            f: Arc::new(f),
            growth_constant,
            growth_power,
        }
    }
}

/// `v(t, x) = E[f(X_t^x)]` for each `x` in the grid; absorbed paths
/// contribute `f(0)` (the atom term).
pub fn smooth_solution(
    sigma: &DiffusionSpec,
    f: &PolyGrowth,
    t: f64,
    x_grid: &[f64],
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let step = observation_step(cfg, t)?;
    x_grid
        .iter()
        .map(|&x| {
            if !(x > 0.0) {
                return Err(Error::Config(format!("grid point {x} must be > 0")));
            }
            let mut local = *cfg;
            local.x0 = x;
            let samples = terminal_values(sigma, &local, Some(step))?;
            let values: Vec<f64> = samples.iter().map(|s| (f.f)(s.value)).collect();
            let (mean, _) = mean_and_stderr(&values);
            Ok(mean)
        })
        .collect()
}
