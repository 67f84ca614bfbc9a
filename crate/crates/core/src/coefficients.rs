//! Diffusion coefficients for `dX = σ(X) dB`, their sup-norm distances and
//! sampled regularity certificates.
//!
//! Every coefficient is a pure function of the state; an additive shift `ε`
//! (a single extra addition) realizes the shifted coefficients `ε + σ(x)`
//! used by the nondegenerate stability experiments.

use crate::cantor::{CantorBase, CantorFunction};
use crate::error::{Error, Result};
use rand::Rng;
use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Evaluation domain of a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    HalfLine,
    FullLine,
}

/// The coefficient zoo.
#[derive(Clone)]
pub enum Kind {
    /// `|x|^α` with `σ(0) = 0`, `α >= 0`.
    PowerLaw { alpha: f64 },
    /// `|x|^α / (1 + |x|^α)` with `σ(0) = 0`, `α in [0,1)`.
    Girsanov { alpha: f64 },
    /// `1 for x > 0, -1 for x <= 0`.
    Tanaka,
    /// `α for x > 0, 1-α for x <= 0`, `α in (0,1)`.
    Skew { alpha: f64 },
    /// Extended Cantor function (exact fixed point or an iterate).
    CantorExtended(CantorFunction),
    /// Constant coefficient; serializable, unlike general customs.
    Constant { value: f64 },
    /// Arbitrary evaluable; not serializable.
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::PowerLaw { alpha } => write!(f, "PowerLaw(alpha={alpha})"),
            Kind::Girsanov { alpha } => write!(f, "Girsanov(alpha={alpha})"),
            Kind::Tanaka => write!(f, "Tanaka"),
            Kind::Skew { alpha } => write!(f, "Skew(alpha={alpha})"),
            Kind::CantorExtended(c) => write!(
                f,
                "CantorExtended(lambda={}, iterate={:?})",
                c.lambda(),
                c.iterate_order()
            ),
            Kind::Constant { value } => write!(f, "Constant({value})"),
            Kind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// A named diffusion coefficient plus an additive shift.
#[derive(Debug, Clone)]
pub struct DiffusionSpec {
    kind: Kind,
    shift: f64,
    domain: Domain,
}

impl DiffusionSpec {
    pub fn new(kind: Kind, shift: f64) -> Result<Self> {
        if !(shift >= 0.0 && shift.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "shift must be finite and >= 0, got {shift}"
            )));
        }
        match &kind {
            Kind::PowerLaw { alpha } if !(*alpha >= 0.0) => {
                return Err(Error::InvalidParameter(format!(
                    "power-law exponent must be >= 0, got {alpha}"
                )))
            }
            Kind::Girsanov { alpha } if !(0.0..1.0).contains(alpha) => {
                return Err(Error::InvalidParameter(format!(
                    "Girsanov exponent must lie in [0,1), got {alpha}"
                )))
            }
            Kind::Skew { alpha } if !(*alpha > 0.0 && *alpha < 1.0) => {
                return Err(Error::InvalidParameter(format!(
                    "skew parameter must lie in (0,1), got {alpha}"
                )))
            }
            _ => {}
        }
        let domain = match &kind {
            Kind::PowerLaw { .. } | Kind::Girsanov { .. } | Kind::CantorExtended(_) => {
                Domain::HalfLine
            }
            Kind::Tanaka | Kind::Skew { .. } | Kind::Constant { .. } | Kind::Custom { .. } => {
                Domain::FullLine
            }
        };
        Ok(DiffusionSpec { kind, shift, domain })
    }

    pub fn power_law(alpha: f64, shift: f64) -> Result<Self> {
        Self::new(Kind::PowerLaw { alpha }, shift)
    }

    pub fn girsanov(alpha: f64, shift: f64) -> Result<Self> {
        Self::new(Kind::Girsanov { alpha }, shift)
    }

    pub fn tanaka() -> Self {
        Self::new(Kind::Tanaka, 0.0).expect("valid")
    }

    pub fn skew(alpha: f64) -> Result<Self> {
        Self::new(Kind::Skew { alpha }, 0.0)
    }

    /// Extended exact Cantor coefficient with shift `ε`.
    pub fn cantor_exact(lambda: f64, shift: f64) -> Result<Self> {
        let c = CantorFunction::exact(lambda)?.extended();
        Self::new(Kind::CantorExtended(c), shift)
    }

    /// Extended `n`-th Cantor iterate with shift `ε`.
    pub fn cantor_iterate(lambda: f64, n: u32, base: CantorBase, shift: f64) -> Result<Self> {
        let c = CantorFunction::iterate(lambda, n, base)?.extended();
        Self::new(Kind::CantorExtended(c), shift)
    }

    pub fn constant(value: f64) -> Self {
        Self::new(Kind::Constant { value }, 0.0).expect("valid")
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(
            Kind::Custom {
                name: name.into(),
                f: Arc::new(f),
            },
            0.0,
        )
        .expect("valid")
    }

    /// Same coefficient with a different additive shift.
    pub fn with_shift(mut self, shift: f64) -> Result<Self> {
        if !(shift >= 0.0 && shift.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "shift must be finite and >= 0, got {shift}"
            )));
        }
        self.shift = shift;
        Ok(self)
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// `ε + base(x)`; total on finite reals and deterministic.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.shift + self.base_eval(x)
    }

    /// The unshifted coefficient.
    #[inline]
    pub fn base_eval(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::PowerLaw { alpha } => {
                if x == 0.0 {
                    0.0
                } else if *alpha == 0.5 {
                    x.abs().sqrt()
                } else if *alpha == 1.0 {
                    x.abs()
                } else {
                    x.abs().powf(*alpha)
                }
            }
            Kind::Girsanov { alpha } => {
                if x == 0.0 {
                    0.0
                } else {
                    let p = x.abs().powf(*alpha);
                    p / (1.0 + p)
                }
            }
            Kind::Tanaka => {
                if x > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Kind::Skew { alpha } => {
                if x > 0.0 {
                    *alpha
                } else {
                    1.0 - *alpha
                }
            }
            Kind::CantorExtended(c) => {
                if x < 0.0 {
                    0.0
                } else if x > 1.0 {
                    1.0
                } else {
                    c.eval_unit(x)
                }
            }
            Kind::Constant { value } => *value,
            Kind::Custom { f, .. } => f(x),
        }
    }

    /// Whether the unshifted coefficient is known to vanish at the origin.
    /// Drives the default absorption policy of the simulation engine;
    /// `Custom` is conservatively reported as `false`.
    pub fn base_vanishes_at_zero(&self) -> bool {
        match &self.kind {
            Kind::PowerLaw { .. } | Kind::Girsanov { .. } => true,
            Kind::CantorExtended(c) => match c.mode() {
                crate::cantor::CantorMode::Exact { .. } => true,
                crate::cantor::CantorMode::Iterate { base, .. } => base.eval(0.0) == 0.0,
            },
            Kind::Constant { value } => *value == 0.0,
            Kind::Tanaka | Kind::Skew { .. } | Kind::Custom { .. } => false,
        }
    }
}

// --- JSON schema {kind, params, shift} ---------------------------------

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    kind: String,
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    params: serde_json::Map<String, serde_json::Value>,
    #[serde(default)]
    shift: f64,
}

impl Serialize for DiffusionSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut params = serde_json::Map::new();
        let kind = match &self.kind {
            Kind::PowerLaw { alpha } => {
                params.insert("alpha".into(), (*alpha).into());
                "power_law"
            }
            Kind::Girsanov { alpha } => {
                params.insert("alpha".into(), (*alpha).into());
                "girsanov"
            }
            Kind::Tanaka => "tanaka",
            Kind::Skew { alpha } => {
                params.insert("alpha".into(), (*alpha).into());
                "skew"
            }
            Kind::CantorExtended(c) => {
                params.insert("lambda".into(), c.lambda().into());
                if let crate::cantor::CantorMode::Iterate { n, base } = c.mode() {
                    params.insert("n".into(), (*n).into());
                    match base {
                        CantorBase::Zero => params.insert("base".into(), "zero".into()),
                        CantorBase::Identity => params.insert("base".into(), "identity".into()),
                        CantorBase::Custom(_) => {
                            return Err(S::Error::custom(
                                "custom Cantor bases are not serializable",
                            ))
                        }
                    };
                }
                "cantor_extended"
            }
            Kind::Constant { value } => {
                params.insert("value".into(), (*value).into());
                "constant"
            }
            Kind::Custom { name, .. } => {
                return Err(S::Error::custom(format!(
                    "custom coefficient '{name}' is not serializable"
                )))
            }
        };
        SpecRepr {
            kind: kind.into(),
            params,
            shift: self.shift,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DiffusionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let repr = SpecRepr::deserialize(deserializer)?;
        let get = |key: &str| -> std::result::Result<f64, D::Error> {
            repr.params
                .get(key)
                .and_then(|v| v.as_f64())
                .ok_or_else(|| D::Error::custom(format!("missing numeric param '{key}'")))
        };
        let spec = match repr.kind.as_str() {
            "power_law" => DiffusionSpec::power_law(get("alpha")?, repr.shift),
            "girsanov" => DiffusionSpec::girsanov(get("alpha")?, repr.shift),
            "tanaka" => DiffusionSpec::tanaka().with_shift(repr.shift),
            "skew" => DiffusionSpec::skew(get("alpha")?).and_then(|s| s.with_shift(repr.shift)),
            "cantor_extended" => {
                let lambda = get("lambda")?;
                match repr.params.get("n") {
                    Some(n) => {
                        let n = n
                            .as_u64()
                            .ok_or_else(|| D::Error::custom("param 'n' must be an integer"))?;
                        let base = match repr.params.get("base").and_then(|b| b.as_str()) {
                            None | Some("zero") => CantorBase::Zero,
                            Some("identity") => CantorBase::Identity,
                            Some(other) => {
                                return Err(D::Error::custom(format!(
                                    "unknown Cantor base '{other}'"
                                )))
                            }
                        };
                        DiffusionSpec::cantor_iterate(lambda, n as u32, base, repr.shift)
                    }
                    None => DiffusionSpec::cantor_exact(lambda, repr.shift),
                }
            }
            "constant" => DiffusionSpec::constant(get("value")?).with_shift(repr.shift),
            other => return Err(D::Error::custom(format!("unknown coefficient kind '{other}'"))),
        };
        spec.map_err(|e| D::Error::custom(e.to_string()))
    }
}

// --- sup distance --------------------------------------------------------

/// Deterministic evaluation grid: uniform points plus explicit breakpoints.
#[derive(Debug, Clone)]
pub struct SamplingPlan {
    pub lo: f64,
    pub hi: f64,
    pub uniform_points: usize,
    pub breakpoints: Vec<f64>,
}

impl SamplingPlan {
    pub fn uniform(lo: f64, hi: f64, points: usize) -> Self {
        SamplingPlan {
            lo,
            hi,
            uniform_points: points,
            breakpoints: Vec::new(),
        }
    }

    /// Default density, `2^17 + 1` uniform points.
    pub fn dense(lo: f64, hi: f64) -> Self {
        Self::uniform(lo, hi, (1 << 17) + 1)
    }

    /// Adds the λ-adic cell endpoints of the Cantor construction down to
    /// `depth` levels. These are exactly the points where iterates break.
    pub fn with_cantor_breakpoints(mut self, lambda: f64, depth: u32) -> Self {
        let mut cells = vec![(0.0f64, 1.0f64)];
        let lo_frac = (1.0 - lambda) / 2.0;
        let hi_frac = (1.0 + lambda) / 2.0;
        self.breakpoints.push(0.0);
        self.breakpoints.push(1.0);
        for _ in 0..depth {
            let mut next = Vec::with_capacity(cells.len() * 2);
            for (a, b) in cells {
                let w = b - a;
                let l = a + lo_frac * w;
                let r = a + hi_frac * w;
                self.breakpoints.push(l);
                self.breakpoints.push(r);
                // A point just inside each plateau pins the plateau value.
                self.breakpoints.push(0.5 * (l + r));
                next.push((a, l));
                next.push((r, b));
            }
            cells = next;
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        self.uniform_points == 0 && self.breakpoints.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.uniform_points;
        let (lo, hi) = (self.lo, self.hi);
        let uniform = (0..n).map(move |i| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        });
        uniform.chain(
            self.breakpoints
                .iter()
                .copied()
                .filter(move |x| *x >= lo && *x <= hi),
        )
    }
}

/// Max over the grid of `|a(x) - b(x)|`; a lower bound on the true sup.
pub fn sup_distance(a: &DiffusionSpec, b: &DiffusionSpec, plan: &SamplingPlan) -> Result<f64> {
    if plan.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut best = 0.0f64;
    for x in plan.points() {
        let d = (a.eval(x) - b.eval(x)).abs();
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

// --- regularity certificates ---------------------------------------------

/// Claimed Hölder modulus `|σ(x)-σ(y)| <= c_H |x-y|^H` for `|x-y| <= valid_radius`.
#[derive(Debug, Clone)]
pub struct HolderSpec {
    pub exponent: f64,
    pub constant: f64,
    pub valid_radius: f64,
}

impl HolderSpec {
    pub fn new(exponent: f64, constant: f64) -> Self {
        HolderSpec {
            exponent,
            constant,
            valid_radius: 1.0,
        }
    }
}

/// Claimed generalized Nakao-Le Gall modulus
/// `|σ(x)-σ(y)| <= |x-y|^L |f(x)-f(y)|^{1/2}` with `ε <= σ`.
#[derive(Clone)]
pub struct NakaoLeGallSpec {
    pub epsilon: f64,
    pub exponent_l: f64,
    pub bounding: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub f_sup: f64,
    pub valid_radius: f64,
}

impl fmt::Debug for NakaoLeGallSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "NakaoLeGallSpec(epsilon={}, L={}, f_sup={})",
            self.epsilon, self.exponent_l, self.f_sup
        )
    }
}

#[derive(Debug, Clone)]
pub enum Regularity {
    Holder(HolderSpec),
    NakaoLeGall(NakaoLeGallSpec),
}

/// One sampled pair that broke the claimed modulus.
#[derive(Debug, Clone, Copy)]
pub struct Violation {
    pub x: f64,
    pub y: f64,
    pub difference: f64,
    pub modulus: f64,
}

#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub violations: Vec<Violation>,
    pub max_ratio: f64,
    pub pairs_checked: usize,
}

impl RegularityReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Absolute slack absorbing evaluation tolerance (Cantor exact mode) and
/// rounding in the modulus itself.
const MODULUS_SLACK: f64 = 1e-9;

/// Draws `samples` random pairs with `|x-y| <= valid_radius` inside `range`
/// and reports violations of the claimed modulus. Deterministic given `seed`.
pub fn check_regularity(
    spec: &DiffusionSpec,
    reg: &Regularity,
    range: (f64, f64),
    samples: usize,
    seed: u64,
) -> Result<RegularityReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let (lo, hi) = range;
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "bad sampling range [{lo}, {hi}]"
        )));
    }
    let radius = match reg {
        Regularity::Holder(h) => h.valid_radius,
        Regularity::NakaoLeGall(n) => n.valid_radius,
    };
    let mut rng = crate::simulate::path_rng(seed, 0);
    let mut violations = Vec::new();
    let mut max_ratio = 0.0f64;
    for _ in 0..samples {
        let x = lo + (hi - lo) * rng.random::<f64>();
        let delta = radius * rng.random::<f64>();
        let y = if rng.random::<bool>() { x + delta } else { x - delta };
        let y = y.clamp(lo, hi);
        let difference = (spec.eval(x) - spec.eval(y)).abs();
        let modulus = match reg {
            Regularity::Holder(h) => h.constant * (x - y).abs().powf(h.exponent),
            Regularity::NakaoLeGall(n) => {
                let fdiff = ((n.bounding)(x) - (n.bounding)(y)).abs();
                (x - y).abs().powf(n.exponent_l) * fdiff.sqrt()
            }
        };
        if modulus > 0.0 {
            max_ratio = max_ratio.max(difference / modulus);
        }
        let mut violated = difference > modulus + MODULUS_SLACK;
        if let Regularity::NakaoLeGall(n) = reg {
            if spec.eval(x) < n.epsilon - MODULUS_SLACK {
                violated = true;
            }
        }
        if violated && violations.len() < 100 {
            violations.push(Violation {
                x,
                y,
                difference,
                modulus,
            });
        }
    }
    Ok(RegularityReport {
        violations,
        max_ratio,
        pairs_checked: samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_values_from_formulas() {
        // power law at the origin, by definition
        assert_eq!(DiffusionSpec::power_law(0.5, 0.0).unwrap().eval(0.0), 0.0);
        // Girsanov: 1/(1+1) at x = 1
        assert_eq!(DiffusionSpec::girsanov(0.5, 0.0).unwrap().eval(1.0), 0.5);
        // Tanaka is -1 on the closed negative half line
        assert_eq!(DiffusionSpec::tanaka().eval(-3.0), -1.0);
        assert_eq!(DiffusionSpec::tanaka().eval(0.0), -1.0);
        // shift additivity is a single addition
        assert_eq!(DiffusionSpec::power_law(1.0, 0.25).unwrap().eval(2.0), 2.25);
        // skew coefficient
        let skew = DiffusionSpec::skew(0.3).unwrap();
        assert_eq!(skew.eval(1.0), 0.3);
        assert_eq!(skew.eval(-1.0), 0.7);
        assert_eq!(skew.eval(0.0), 0.7);
    }

    #[test]
    fn power_law_alpha_zero_keeps_origin_at_zero() {
        let s = DiffusionSpec::power_law(0.0, 0.0).unwrap();
        assert_eq!(s.eval(0.0), 0.0);
        assert_eq!(s.eval(0.3), 1.0);
        assert_eq!(s.eval(-2.0), 1.0);
    }

    #[test]
    fn sup_distance_cases() {
        let plan = SamplingPlan::dense(-1.0, 2.0);
        let a = DiffusionSpec::power_law(1.0, 0.0).unwrap();
        assert_eq!(sup_distance(&a, &a, &plan).unwrap(), 0.0);
        let b = DiffusionSpec::power_law(1.0, 0.1).unwrap();
        let d = sup_distance(&a, &b, &plan).unwrap();
        assert!((d - 0.1).abs() < 1e-15);
        let empty = SamplingPlan::uniform(0.0, 1.0, 0);
        assert!(matches!(
            sup_distance(&a, &b, &empty),
            Err(Error::EmptyGrid)
        ));
    }

    #[test]
    fn cantor_iterate_distance_respects_paper_bound() {
        for n in [1u32, 3, 6] {
            let exact = DiffusionSpec::cantor_exact(1.0 / 3.0, 0.0).unwrap();
            let it = DiffusionSpec::cantor_iterate(1.0 / 3.0, n, CantorBase::Zero, 0.0).unwrap();
            let plan =
                SamplingPlan::dense(0.0, 1.0).with_cantor_breakpoints(1.0 / 3.0, n + 2);
            let d = sup_distance(&exact, &it, &plan).unwrap();
            assert!(
                d <= (2.0f64).powi(2 - n as i32) + 1e-12,
                "n={n} distance {d}"
            );
        }
    }

    #[test]
    fn sup_distance_symmetry_and_triangle() {
        let plan = SamplingPlan::uniform(-1.0, 1.5, 4097);
        let a = DiffusionSpec::power_law(0.5, 0.0).unwrap();
        let b = DiffusionSpec::girsanov(0.5, 0.0).unwrap();
        let c = DiffusionSpec::tanaka();
        let dab = sup_distance(&a, &b, &plan).unwrap();
        let dba = sup_distance(&b, &a, &plan).unwrap();
        assert_eq!(dab, dba);
        let dac = sup_distance(&a, &c, &plan).unwrap();
        let dbc = sup_distance(&b, &c, &plan).unwrap();
        assert!(dac <= dab + dbc + 1e-15);
    }

    #[test]
    fn holder_certificates() {
        // slope-1 power law satisfies a Lipschitz modulus
        let pl = DiffusionSpec::power_law(1.0, 0.0).unwrap();
        let rep = check_regularity(
            &pl,
            &Regularity::Holder(HolderSpec::new(1.0, 1.0)),
            (0.0, 2.0),
            20_000,
            7,
        )
        .unwrap();
        assert!(rep.holds(), "violations: {:?}", rep.violations.first());

        // the Cantor function is Hölder(H_lambda) with constant exactly 1
        let cf = DiffusionSpec::cantor_exact(1.0 / 3.0, 0.0).unwrap();
        let h = crate::cantor::holder_lambda(1.0 / 3.0).unwrap().value;
        let rep = check_regularity(
            &cf,
            &Regularity::Holder(HolderSpec::new(h, 1.0)),
            (0.0, 1.0),
            20_000,
            11,
        )
        .unwrap();
        assert!(rep.holds(), "violations: {:?}", rep.violations.first());

        // Tanaka's jump breaks every Hölder modulus near the origin
        let rep = check_regularity(
            &DiffusionSpec::tanaka(),
            &Regularity::Holder(HolderSpec::new(0.5, 1.0)),
            (-1.0, 1.0),
            20_000,
            13,
        )
        .unwrap();
        assert!(!rep.holds());
        let v = rep.violations[0];
        assert!(v.x.signum() != v.y.signum() || v.y == 0.0 || v.x == 0.0);
    }

    #[test]
    fn nakao_le_gall_certificate_for_shifted_cantor() {
        // sigma^eps = eps + extended Cantor, f = the Cantor part itself,
        // L = H_lambda / 2.
        let eps = 0.25;
        let spec = DiffusionSpec::cantor_exact(0.5, eps).unwrap();
        let f = DiffusionSpec::cantor_exact(0.5, 0.0).unwrap();
        let h = crate::cantor::holder_lambda(0.5).unwrap().value;
        let nlg = NakaoLeGallSpec {
            epsilon: eps,
            exponent_l: h / 2.0,
            bounding: Arc::new(move |x| f.eval(x)),
            f_sup: 1.0,
            valid_radius: 1.0,
        };
        let rep = check_regularity(
            &spec,
            &Regularity::NakaoLeGall(nlg),
            (-0.5, 1.5),
            20_000,
            17,
        )
        .unwrap();
        assert!(rep.holds(), "violations: {:?}", rep.violations.first());
    }

    #[test]
    fn monotone_coefficients_sampled() {
        let specs = [
            DiffusionSpec::power_law(0.7, 0.0).unwrap(),
            DiffusionSpec::girsanov(0.5, 0.0).unwrap(),
            DiffusionSpec::cantor_exact(0.5, 0.0).unwrap(),
        ];
        for s in &specs {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=2000 {
                let x = i as f64 / 1000.0;
                let v = s.eval(x);
                assert!(v + 1e-12 >= prev, "{s:?} not monotone at {x}");
                prev = v;
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let specs = [
            DiffusionSpec::power_law(0.5, 0.25).unwrap(),
            DiffusionSpec::girsanov(0.25, 0.0).unwrap(),
            DiffusionSpec::tanaka(),
            DiffusionSpec::skew(0.3).unwrap(),
            DiffusionSpec::cantor_exact(0.5, 0.25).unwrap(),
            DiffusionSpec::cantor_iterate(0.5, 4, CantorBase::Identity, 0.0).unwrap(),
            DiffusionSpec::constant(1.0),
        ];
        for s in &specs {
            let json = serde_json::to_string(s).unwrap();
            let back: DiffusionSpec = serde_json::from_str(&json).unwrap();
            for i in -20..=40 {
                let x = i as f64 / 20.0;
                assert_eq!(s.eval(x), back.eval(x), "{json} differs at {x}");
            }
        }
        // customs refuse to serialize
        let c = DiffusionSpec::custom("one", |_| 1.0);
        assert!(serde_json::to_string(&c).is_err());
    }

    #[test]
    fn schema_examples_parse() {
        let s: DiffusionSpec = serde_json::from_str(
            r#"{"kind":"cantor_extended","params":{"lambda":0.5,"n":3,"base":"zero"},"shift":0.25}"#,
        )
        .unwrap();
        assert_eq!(s.shift(), 0.25);
        assert_eq!(s.eval(-1.0), 0.25);
        let err = serde_json::from_str::<DiffusionSpec>(r#"{"kind":"power_law","params":{}}"#);
        assert!(err.is_err());
    }
}
