//! Strong-convergence machinery for the stability problem `σ_n -> σ`.
//!
//! Contains the auxiliary function used by the Yamada-Watanabe argument
//! (a smooth approximation of `|x|` whose second derivative is
//! `1/(c ρ(|x|))` on an annulus), the theoretical rate bounds with their
//! explicit constants, least-squares rate fitting, and the Monte Carlo
//! experiment harness that compares measured decay against the bounds.

use crate::coefficients::{sup_distance, DiffusionSpec, SamplingPlan};
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadraturePlan};
use crate::simulate::{mc_estimate, SimConfig, Statistic};
use serde::Serialize;

// --- Yamada-Watanabe auxiliary function ----------------------------------

/// Smooth approximation of `|x|` built from `ρ(u) = u^{2H}`:
/// zero on `[-a, a]`, unit slope beyond `b`, and curvature `1/(c_norm ρ)`
/// in between, where `c_norm = ∫_a^b dy/ρ(y)`.
#[derive(Debug, Clone, Copy)]
pub struct YWFunction {
    pub exponent_two_h: f64,
    pub a: f64,
    pub b: f64,
    pub c_norm: f64,
}

/// `∫_a^u z^{-p} dz` in closed form.
fn anti_inverse_rho(p: f64, a: f64, u: f64) -> f64 {
    if (p - 1.0).abs() < 1e-14 {
        (u / a).ln()
    } else {
        (u.powf(1.0 - p) - a.powf(1.0 - p)) / (1.0 - p)
    }
}

/// `∫_a^x G(y) dy` where `G(y) = ∫_a^y z^{-p} dz`.
fn anti_anti(p: f64, a: f64, x: f64) -> f64 {
    if (p - 1.0).abs() < 1e-14 {
        x * (x / a).ln() - (x - a)
    } else if (p - 2.0).abs() < 1e-14 {
        (x - a) / a - (x / a).ln()
    } else {
        (x.powf(2.0 - p) - a.powf(2.0 - p)) / ((1.0 - p) * (2.0 - p))
            - a.powf(1.0 - p) * (x - a) / (1.0 - p)
    }
}

/// Builds the auxiliary function for Hölder exponent `h in [1/2, 1]` and
/// annulus `0 < a < b <= 1`.
pub fn yw_build(h: f64, a: f64, b: f64) -> Result<YWFunction> {
    if !(0.5..=1.0).contains(&h) {
        return Err(Error::InvalidParameter(format!(
            "Hölder exponent must lie in [1/2, 1], got {h}"
        )));
    }
    if !(a > 0.0 && a < b) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < a < b, got a = {a}, b = {b}"
        )));
    }
    if !(b <= 1.0) {
        return Err(Error::InvalidParameter(format!("need b <= 1, got {b}")));
    }
    let p = 2.0 * h;
    Ok(YWFunction {
        exponent_two_h: p,
        a,
        b,
        c_norm: anti_inverse_rho(p, a, b),
    })
}

impl YWFunction {
    pub fn eval(&self, x: f64) -> f64 {
        let z = x.abs();
        if z <= self.a {
            0.0
        } else if z <= self.b {
            anti_anti(self.exponent_two_h, self.a, z) / self.c_norm
        } else {
            anti_anti(self.exponent_two_h, self.a, self.b) / self.c_norm + (z - self.b)
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let z = x.abs();
        let psi = if z <= self.a {
            0.0
        } else if z <= self.b {
            anti_inverse_rho(self.exponent_two_h, self.a, z) / self.c_norm
        } else {
            1.0
        };
        psi * x.signum()
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let z = x.abs();
        if z > self.a && z < self.b {
            1.0 / (self.c_norm * z.powf(self.exponent_two_h))
        } else {
            0.0
        }
    }

    /// `c_norm` recomputed by quadrature, for cross-checks.
    pub fn c_norm_by_quadrature(&self) -> f64 {
        let p = self.exponent_two_h;
        integrate(
            |y| Ok(y.powf(-p)),
            self.a,
            self.b,
            QuadraturePlan { cells: 64 },
        )
        .expect("smooth positive integrand")
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SandwichReport {
    pub samples: usize,
    pub sandwich_violations: usize,
    pub derivative_violations: usize,
    pub symmetry_violations: usize,
    /// Worst relative error of the curvature formula against a central
    /// second difference on the open annulus.
    pub max_curvature_rel_err: f64,
}

impl SandwichReport {
    pub fn ok(&self) -> bool {
        self.sandwich_violations == 0
            && self.derivative_violations == 0
            && self.symmetry_violations == 0
            && self.max_curvature_rel_err < 1e-4
    }
}

/// Verifies `|x| - b <= φ(x) <= |x|`, `|φ'| <= 1`, symmetry, and the
/// curvature formula by numeric differentiation away from the kinks.
pub fn yw_sandwich_check(f: &YWFunction, samples: usize, seed: u64) -> SandwichReport {
    use rand::Rng;
    let mut rng = crate::simulate::path_rng(seed, 0);
    let span = 1.0 + f.b;
    let mut sandwich_violations = 0;
    let mut derivative_violations = 0;
    let mut symmetry_violations = 0;
    for _ in 0..samples {
        let x = span * (2.0 * rng.random::<f64>() - 1.0);
        let v = f.eval(x);
        if !(x.abs() - f.b - 1e-12 <= v && v <= x.abs() + 1e-12) {
            sandwich_violations += 1;
        }
        if f.derivative(x).abs() > 1.0 + 1e-12 {
            derivative_violations += 1;
        }
        if (v - f.eval(-x)).abs() > 1e-12 {
            symmetry_violations += 1;
        }
    }
    // Central second difference against the closed form, interior points only.
    let h = (f.b - f.a) * 1e-4;
    let mut max_rel = 0.0f64;
    for i in 1..=17 {
        let z = f.a + (f.b - f.a) * (i as f64 / 18.0);
        if z - 2.0 * h <= f.a || z + 2.0 * h >= f.b {
            continue;
        }
        let fd = (f.eval(z + h) - 2.0 * f.eval(z) + f.eval(z - h)) / (h * h);
        let exact = f.second_derivative(z);
        max_rel = max_rel.max((fd - exact).abs() / exact.abs());
    }
    SandwichReport {
        samples,
        sandwich_violations,
        derivative_violations,
        symmetry_violations,
        max_curvature_rel_err: max_rel,
    }
}

// --- theoretical bounds ---------------------------------------------------

/// Which stability theorem supplies the bound shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Regime {
    /// Hölder 1/2: bound `C2 (-log Δ)^{-1/2}`, valid for `Δ < 2^{-1/2}`.
    HolderHalf,
    /// Hölder H in (1/2, 1]: bound `C2 Δ^{1 - 1/(2H)}`, valid `Δ < 2^{-H}`.
    HolderAbove { h: f64 },
    /// Shifted coefficients, H = 0: `ε^{-3} C4 (-log Δ)^{-1/2}`.
    NlgZero { epsilon: f64 },
    /// Shifted coefficients, H in (0, 1]: `ε^{-3} C4 Δ^{1 - 1/(H+1)}`,
    /// valid `Δ < 2^{-(H+1)/2}`.
    NlgPositive { h: f64, epsilon: f64 },
}

/// Inputs for the explicit constants. All are upper bounds taken from the
/// statements accompanying the theorems.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct BoundParams {
    /// Hölder constant of σ.
    pub c_h: f64,
    /// `sup |σ|`.
    pub sigma_sup: f64,
    /// `2 (‖σ‖_∞ + sup_n ‖σ_n‖_∞) ‖f‖_∞`; see [`nlg_c_l`].
    pub c_l: f64,
    /// Sup of the bounding function of the Nakao-Le Gall condition.
    pub f_sup: f64,
}

/// The constant `c_L` of the shifted-coefficient estimates.
pub fn nlg_c_l(sigma_sup: f64, sigma_n_sup: f64, f_sup: f64) -> f64 {
    2.0 * (sigma_sup + sigma_n_sup) * f_sup
}

/// `C1(t, H) <= (2/log 2)(1 + t c_H² + t)`.
pub fn c1_bound(t: f64, c_h: f64) -> f64 {
    2.0 / std::f64::consts::LN_2 * (1.0 + t * c_h * c_h + t)
}

/// `C2(T, H) <= 4 (2 c_H² + 4 ‖σ‖_∞² + 2) T sqrt(C1)`.
pub fn c2_bound(t: f64, c_h: f64, sigma_sup: f64) -> f64 {
    4.0 * (2.0 * c_h * c_h + 4.0 * sigma_sup * sigma_sup + 2.0) * t * c1_bound(t, c_h).sqrt()
}

/// `C3(t) <= (2/log 2)(1 + sqrt(t) c_L + t)`.
pub fn c3_bound(t: f64, c_l: f64) -> f64 {
    2.0 / std::f64::consts::LN_2 * (1.0 + t.sqrt() * c_l + t)
}

/// `C4(T) <= 4 (c_L sqrt(T) + 4 ‖f‖_∞² T + 2 T) sqrt(C3)`.
pub fn c4_bound(t: f64, c_l: f64, f_sup: f64) -> f64 {
    4.0 * (c_l * t.sqrt() + 4.0 * f_sup * f_sup * t + 2.0 * t) * c3_bound(t, c_l).sqrt()
}

/// A bound of the form `constant * form(Δ)`, valid for `Δ < threshold`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TheoreticalBound {
    pub regime: Regime,
    pub constant: f64,
    pub threshold: f64,
}

/// Assembles the bound for a regime at horizon `t` from the remark
/// constants. The constants are upper bounds, not sharp values.
pub fn theoretical_bound(regime: Regime, t: f64, params: BoundParams) -> Result<TheoreticalBound> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be > 0, got {t}")));
    }
    let (constant, threshold) = match regime {
        Regime::HolderHalf => (
            c2_bound(t, params.c_h, params.sigma_sup),
            std::f64::consts::FRAC_1_SQRT_2,
        ),
        Regime::HolderAbove { h } => {
            if !(h > 0.5 && h <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "Hölder regime above needs H in (1/2, 1], got {h}"
                )));
            }
            (c2_bound(t, params.c_h, params.sigma_sup), (2.0f64).powf(-h))
        }
        Regime::NlgZero { epsilon } => {
            check_epsilon(epsilon)?;
            (
                epsilon.powi(-3) * c4_bound(t, params.c_l, params.f_sup),
                std::f64::consts::FRAC_1_SQRT_2,
            )
        }
        Regime::NlgPositive { h, epsilon } => {
            if !(h > 0.0 && h <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "NLG positive regime needs H in (0, 1], got {h}"
                )));
            }
            check_epsilon(epsilon)?;
            (
                epsilon.powi(-3) * c4_bound(t, params.c_l, params.f_sup),
                (2.0f64).powf(-(h + 1.0) / 2.0),
            )
        }
    };
    Ok(TheoreticalBound {
        regime,
        constant,
        threshold,
    })
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "ε must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

impl TheoreticalBound {
    /// Power-law exponent of the bound, `None` for the log regimes.
    pub fn exponent(&self) -> Option<f64> {
        match self.regime {
            Regime::HolderHalf | Regime::NlgZero { .. } => None,
            Regime::HolderAbove { h } => Some(1.0 - 1.0 / (2.0 * h)),
            Regime::NlgPositive { h, .. } => Some(1.0 - 1.0 / (h + 1.0)),
        }
    }

    pub fn is_log_form(&self) -> bool {
        self.exponent().is_none()
    }

    /// Bound value at perturbation size `delta`.
    pub fn eval(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta < self.threshold) {
            return Err(Error::Domain(format!(
                "Δ = {delta} outside the validity range (0, {})",
                self.threshold
            )));
        }
        Ok(match self.exponent() {
            Some(p) => self.constant * delta.powf(p),
            None => self.constant * (-delta.ln()).powf(-0.5),
        })
    }
}

// --- rate fitting ----------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Ordinary least squares on `(log Δ, log error)`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<PowerFit> {
    if points.len() < 3 {
        return Err(Error::Data(format!(
            "need at least 3 points to fit a rate, got {}",
            points.len()
        )));
    }
    for &(d, e) in points {
        if !(d > 0.0 && e > 0.0) {
            return Err(Error::Data(format!(
                "rate fits need positive Δ and error, got ({d}, {e})"
            )));
        }
    }
    let mut sorted: Vec<f64> = points.iter().map(|p| p.0).collect();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Data("Δ values must be distinct".into()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let slope_stderr = if points.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(PowerFit {
        slope,
        intercept,
        slope_stderr,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LogFormFit {
    /// Proportionality constant of `error ≈ K (-log Δ)^{-1/2}`, fitted
    /// through the origin.
    pub constant: f64,
    /// `‖e - K g‖₂ / ‖e‖₂`.
    pub rel_residual: f64,
}

/// Fits the log-regime shape `error = K (-log Δ)^{-1/2}` through the origin.
pub fn fit_log_form(points: &[(f64, f64)]) -> Result<LogFormFit> {
    if points.len() < 3 {
        return Err(Error::Data(format!(
            "need at least 3 points to fit, got {}",
            points.len()
        )));
    }
    for &(d, e) in points {
        if !(d > 0.0 && d < 1.0 && e > 0.0) {
            return Err(Error::Data(format!(
                "log-form fits need Δ in (0,1) and positive error, got ({d}, {e})"
            )));
        }
    }
    let g: Vec<f64> = points.iter().map(|p| (-p.0.ln()).powf(-0.5)).collect();
    let num: f64 = points.iter().zip(&g).map(|(p, gi)| p.1 * gi).sum();
    let den: f64 = g.iter().map(|gi| gi * gi).sum();
    let constant = num / den;
    let ssr: f64 = points
        .iter()
        .zip(&g)
        .map(|(p, gi)| {
            let r = p.1 - constant * gi;
            r * r
        })
        .sum();
    let ee: f64 = points.iter().map(|p| p.1 * p.1).sum();
    Ok(LogFormFit {
        constant,
        rel_residual: (ssr / ee).sqrt(),
    })
}

// --- experiment harness ----------------------------------------------------

/// One `(σ, σ_n)` pair in an approximation family.
#[derive(Debug, Clone)]
pub struct RateProblem {
    pub n: u32,
    pub sigma: DiffusionSpec,
    pub sigma_n: DiffusionSpec,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatePoint {
    pub n: u32,
    pub delta: f64,
    pub error: f64,
    pub stderr: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateFit {
    PowerLaw(PowerFit),
    LogForm(LogFormFit),
}

#[derive(Debug, Clone, Serialize)]
pub struct RateExperimentResult {
    pub points: Vec<RatePoint>,
    pub fit: RateFit,
    pub statistic: Statistic,
    pub bound: TheoreticalBound,
    /// Whether `sqrt(h) < min_n Δ_n / 10` held for the discretization used.
    pub h_rule_satisfied: bool,
}

impl RateExperimentResult {
    /// Consecutive errors never increase by more than `k` pooled standard
    /// errors.
    pub fn errors_nonincreasing(&self, k: f64) -> bool {
        self.points.windows(2).all(|w| {
            let pooled = (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            w[1].error <= w[0].error + k * pooled
        })
    }
}

/// Measures `Δ_n`, runs the coupled Monte Carlo for every family member and
/// fits the decay. Members whose `Δ_n` exceeds the bound's validity
/// threshold are excluded with a warning.
pub fn run_rate_experiment(
    family: &[RateProblem],
    cfg: &SimConfig,
    bound: &TheoreticalBound,
    statistic: Statistic,
    plan: &SamplingPlan,
) -> Result<RateExperimentResult> {
    if family.is_empty() {
        return Err(Error::Data("empty experiment family".into()));
    }
    let mut deltas = Vec::with_capacity(family.len());
    let mut kept = Vec::with_capacity(family.len());
    for problem in family {
        let delta = sup_distance(&problem.sigma, &problem.sigma_n, plan)?;
        if delta == 0.0 {
            log::warn!(
                "excluding n = {}: σ and σ_n coincide on the grid (Δ = 0)",
                problem.n
            );
            continue;
        }
        if delta >= bound.threshold {
            log::warn!(
                "excluding n = {}: Δ = {delta} is outside the regime validity (< {})",
                problem.n,
                bound.threshold
            );
            continue;
        }
        deltas.push(delta);
        kept.push(problem);
    }
    if kept.is_empty() {
        return Err(Error::Data(
            "no usable family member: every pair is identical or outside the \
             regime validity range"
                .into(),
        ));
    }
    let min_delta = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let h_rule_satisfied = cfg.step_size().sqrt() < min_delta / 10.0;
    if !h_rule_satisfied {
        log::warn!(
            "h^(1/2) = {} is not below min Δ/10 = {}; discretization bias may \
             not be negligible",
            cfg.step_size().sqrt(),
            min_delta / 10.0
        );
    }
    let mut points = Vec::with_capacity(kept.len());
    for (problem, &delta) in kept.iter().zip(&deltas) {
        let est = mc_estimate(&problem.sigma, &problem.sigma_n, cfg, statistic)?;
        points.push(RatePoint {
            n: problem.n,
            delta,
            error: est.mean,
            stderr: est.std_error,
            bound: bound.eval(delta)?,
        });
    }
    points.sort_by_key(|p| p.n);
    let data: Vec<(f64, f64)> = points.iter().map(|p| (p.delta, p.error)).collect();
    let fit = if bound.is_log_form() {
        RateFit::LogForm(fit_log_form(&data)?)
    } else {
        RateFit::PowerLaw(fit_rate(&data)?)
    };
    Ok(RateExperimentResult {
        points,
        fit,
        statistic,
        bound: *bound,
        h_rule_satisfied,
    })
}

// --- shipped families -------------------------------------------------------

/// `σ = 1`, `σ_n = 1 + 2^{-n}`: the Lipschitz sanity family with exactly
/// linear error propagation.
pub fn constant_family(ns: impl IntoIterator<Item = u32>) -> Vec<RateProblem> {
    ns.into_iter()
        .map(|n| RateProblem {
            n,
            sigma: DiffusionSpec::constant(1.0),
            sigma_n: DiffusionSpec::constant(1.0 + (0.5f64).powi(n as i32)),
        })
        .collect()
}

/// `σ = |x|^α`, `σ_n = σ + 2^{-n}`.
pub fn power_law_shift_family(
    alpha: f64,
    ns: impl IntoIterator<Item = u32>,
) -> Result<Vec<RateProblem>> {
    ns.into_iter()
        .map(|n| {
            Ok(RateProblem {
                n,
                sigma: DiffusionSpec::power_law(alpha, 0.0)?,
                sigma_n: DiffusionSpec::power_law(alpha, (0.5f64).powi(n as i32))?,
            })
        })
        .collect()
}

/// Extended Cantor limit vs its iterates, both shifted by `ε`.
pub fn cantor_family(
    lambda: f64,
    epsilon: f64,
    base: crate::cantor::CantorBase,
    ns: impl IntoIterator<Item = u32>,
) -> Result<Vec<RateProblem>> {
    ns.into_iter()
        .map(|n| {
            Ok(RateProblem {
                n,
                sigma: DiffusionSpec::cantor_exact(lambda, epsilon)?,
                sigma_n: DiffusionSpec::cantor_iterate(lambda, n, base.clone(), epsilon)?,
            })
        })
        .collect()
}
