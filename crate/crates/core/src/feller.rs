//! Feller test for the boundary point 0 of `dX = σ(X) dB` on `(0, ∞)`.
//!
//! With the identity scale function the test reduces to the limits of
//!
//! ```text
//! μ(x) = ∫_x^c (c - y) / σ(y)^2 dy      ν(x) = ∫_x^c (y - x) / σ(y)^2 dy
//! ```
//!
//! as `x` decreases to 0. Both divergent means 0 is natural; ν finite with μ
//! divergent means exit-not-entrance; both finite means nonsingular. For a
//! monotone coefficient with `σ(0) = 0`, pathwise uniqueness holds exactly
//! when `μ(0+) = ∞`.

use crate::coefficients::DiffusionSpec;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadraturePlan};
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct FellerConfig {
    /// Upper limit of the integrals, a point of `(0, ∞)`.
    pub c: f64,
    /// Decreasing lower limits approaching 0.
    pub x_grid: Vec<f64>,
    /// Partial values beyond this cap are declared divergent.
    pub divergence_cap: f64,
    /// Growth per unit of `log(1/x)` above which the limit is declared
    /// divergent, fitted on the last `SLOPE_WINDOW` grid points.
    pub slope_threshold: f64,
    pub quad: QuadraturePlan,
}

const SLOPE_WINDOW: usize = 10;

impl FellerConfig {
    /// Grid `c 2^{-k}`, `k = 1..=60`.
    pub fn with_c(c: f64) -> Self {
        FellerConfig {
            c,
            x_grid: (1..=60).map(|k| c * (0.5f64).powi(k)).collect(),
            divergence_cap: 1e8,
            slope_threshold: 0.1,
            quad: QuadraturePlan::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("c must be in (0, inf), got {}", self.c)));
        }
        if self.x_grid.len() < 8 {
            return Err(Error::Config(
                "x_grid too short: need at least 8 points".into(),
            ));
        }
        let decreasing = self
            .x_grid
            .windows(2)
            .all(|w| w[0] > w[1] && w[1] > 0.0);
        if !decreasing || self.x_grid[0] >= self.c {
            return Err(Error::Config(
                "x_grid must decrease strictly toward 0 below c".into(),
            ));
        }
        Ok(())
    }
}

impl Default for FellerConfig {
    fn default() -> Self {
        Self::with_c(0.5)
    }
}

/// `μ(x) = ∫_x^c (c-y)/σ(y)² dy` by per-cell Gauss-Legendre with geometric
/// refinement toward `x`.
pub fn mu_integral(
    sigma: &DiffusionSpec,
    c: f64,
    x: f64,
    quad: QuadraturePlan,
) -> Result<f64> {
    check_limits(c, x)?;
    integrate(|y| weighted_inverse_square(sigma, y, c - y), x, c, quad)
}

/// `ν(x) = ∫_x^c (y-x)/σ(y)² dy`.
pub fn nu_integral(
    sigma: &DiffusionSpec,
    c: f64,
    x: f64,
    quad: QuadraturePlan,
) -> Result<f64> {
    check_limits(c, x)?;
    integrate(|y| weighted_inverse_square(sigma, y, y - x), x, c, quad)
}

fn check_limits(c: f64, x: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    if !(x >= 0.0 && x <= c) {
        return Err(Error::InvalidParameter(format!(
            "lower limit {x} outside [0, {c}]"
        )));
    }
    Ok(())
}

#[inline]
fn weighted_inverse_square(sigma: &DiffusionSpec, y: f64, weight: f64) -> Result<f64> {
    let s = sigma.eval(y);
    if s == 0.0 {
        return Err(Error::SingularIntegrand {
            location: y,
            detail: "σ vanishes at a quadrature node".into(),
        });
    }
    Ok(weight / (s * s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum LimitClass {
    Finite(f64),
    Divergent,
}

impl LimitClass {
    pub fn is_divergent(&self) -> bool {
        matches!(self, LimitClass::Divergent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Both integrals diverge; the boundary is never reached.
    Natural,
    /// ν finite, μ divergent.
    ExitNotEntrance,
    /// Both finite; the diffusion may start from the boundary.
    NonSingular,
    /// ν divergent with μ finite — ruled out analytically, flagged if the
    /// numerics ever report it.
    InconsistentCase,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiagnosticRow {
    pub x: f64,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryReport {
    pub mu_limit: LimitClass,
    pub nu_limit: LimitClass,
    pub classification: Classification,
    /// Set only when the caller declares both Proposition-style
    /// hypotheses (monotone σ with σ² > 0, and σ(0) = 0); then it is
    /// `μ(0+) = ∞`.
    pub pathwise_uniqueness: Option<bool>,
    pub diagnostics: Vec<DiagnosticRow>,
}

struct Observed {
    values: Vec<f64>,
    cap_hit: bool,
}

fn observe<F: Fn(f64) -> Result<f64>>(cfg: &FellerConfig, integral: F) -> Result<Observed> {
    let mut values = Vec::with_capacity(cfg.x_grid.len());
    for &x in &cfg.x_grid {
        let v = integral(x)?;
        values.push(v);
        if v > cfg.divergence_cap {
            return Ok(Observed {
                values,
                cap_hit: true,
            });
        }
    }
    Ok(Observed {
        values,
        cap_hit: false,
    })
}

/// Least-squares slope of `v` against `log(1/x)` over the last few points.
fn tail_slope(xs: &[f64], vs: &[f64]) -> f64 {
    let n = xs.len().min(vs.len());
    let take = SLOPE_WINDOW.min(n);
    let xs = &xs[n - take..n];
    let vs = &vs[n - take..n];
    let t: Vec<f64> = xs.iter().map(|x| (1.0 / x).ln()).collect();
    let tbar = t.iter().sum::<f64>() / take as f64;
    let vbar = vs.iter().sum::<f64>() / take as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (ti, vi) in t.iter().zip(vs) {
        num += (ti - tbar) * (vi - vbar);
        den += (ti - tbar) * (ti - tbar);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Geometric-sequence extrapolation of the limit from the last increments.
fn richardson_limit(vs: &[f64]) -> f64 {
    let n = vs.len();
    if n < 3 {
        return vs[n - 1];
    }
    let d1 = vs[n - 2] - vs[n - 3];
    let d2 = vs[n - 1] - vs[n - 2];
    if d1.abs() < 1e-300 || d2.abs() < 1e-300 {
        return vs[n - 1];
    }
    let q = d2 / d1;
    if q > 0.0 && q < 0.95 {
        vs[n - 1] + d2 * q / (1.0 - q)
    } else {
        vs[n - 1]
    }
}

fn classify_one(cfg: &FellerConfig, observed: &Observed) -> LimitClass {
    if observed.cap_hit {
        return LimitClass::Divergent;
    }
    let slope = tail_slope(&cfg.x_grid, &observed.values);
    if slope > cfg.slope_threshold {
        LimitClass::Divergent
    } else {
        LimitClass::Finite(richardson_limit(&observed.values))
    }
}

/// Evaluates μ and ν along the grid and classifies the boundary.
///
/// `monotone_declared` and `sigma_zero_is_zero` are caller-supplied
/// hypothesis declarations; the uniqueness predicate stays unset unless both
/// hold.
pub fn classify_boundary(
    sigma: &DiffusionSpec,
    cfg: &FellerConfig,
    monotone_declared: bool,
    sigma_zero_is_zero: bool,
) -> Result<BoundaryReport> {
    cfg.validate()?;
    let mu_obs = observe(cfg, |x| mu_integral(sigma, cfg.c, x, cfg.quad))?;
    let nu_obs = observe(cfg, |x| nu_integral(sigma, cfg.c, x, cfg.quad))?;
    let mu_limit = classify_one(cfg, &mu_obs);
    let nu_limit = classify_one(cfg, &nu_obs);
    let (mu_vals, nu_vals) = (mu_obs.values, nu_obs.values);
    let classification = match (nu_limit.is_divergent(), mu_limit.is_divergent()) {
        (true, true) => Classification::Natural,
        (false, true) => Classification::ExitNotEntrance,
        (false, false) => Classification::NonSingular,
        (true, false) => Classification::InconsistentCase,
    };
    let pathwise_uniqueness = if monotone_declared && sigma_zero_is_zero {
        Some(mu_limit.is_divergent())
    } else {
        None
    };
    let diagnostics = cfg
        .x_grid
        .iter()
        .enumerate()
        .map(|(i, &x)| DiagnosticRow {
            x,
            mu: mu_vals.get(i).copied(),
            nu: nu_vals.get(i).copied(),
        })
        .take(mu_vals.len().max(nu_vals.len()))
        .collect();
    Ok(BoundaryReport {
        mu_limit,
        nu_limit,
        classification,
        pathwise_uniqueness,
        diagnostics,
    })
}
