//! The middle-λ Cantor function, its iterates and their error bounds.
//!
//! For λ in (0,1) the construction map `H` sends a bounded function `g` on
//! `[0,1]` to
//!
//! ```text
//!          | g(2x/(1-λ)) / 2                     0 <= x < (1-λ)/2
//! H(g)(x) =| 1/2                                 (1-λ)/2 <= x < (1+λ)/2
//!          | 1/2 + g(2x/(1-λ) - (1+λ)/(1-λ))/2   (1+λ)/2 <= x <= 1
//! ```
//!
//! `H` contracts the sup norm by 1/2, so it has a unique bounded fixed point:
//! the middle-λ Cantor function. Iterating `H` from any bounded seed
//! converges uniformly, with tail bound `2^{-n+1} * sup|c_0 - c_1|`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Seed function `c_0` for the iterate construction.
///
/// `Zero` is the discontinuous seed used in the shifted Nakao-Le Gall
/// experiments; `Identity` (clamped to `[0,1]`) is Lipschitz and suits the
/// Hölder-regime experiments.
#[derive(Clone)]
pub enum CantorBase {
    Zero,
    Identity,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl CantorBase {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CantorBase::Zero => 0.0,
            CantorBase::Identity => x.clamp(0.0, 1.0),
            CantorBase::Custom(f) => f(x),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CantorBase::Zero => "zero",
            CantorBase::Identity => "identity",
            CantorBase::Custom(_) => "custom",
        }
    }
}

impl fmt::Debug for CantorBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evaluation strategy: descend the self-similar map to a certified
/// tolerance, or apply the map exactly `n` times to a seed.
#[derive(Debug, Clone)]
pub enum CantorMode {
    Exact { tolerance: f64 },
    Iterate { n: u32, base: CantorBase },
}

/// Default exact-mode tolerance, `2^-46`: each recursion level halves the
/// value bracket, so depth 46 certifies an error near double precision.
pub const EXACT_TOLERANCE: f64 = 1.4210854715202004e-14;

/// Evaluable middle-λ Cantor function (or one of its iterates).
#[derive(Debug, Clone)]
pub struct CantorFunction {
    lambda: f64,
    mode: CantorMode,
    extended: bool,
    // cached plateau edges and branch rescale factor
    lo: f64,
    hi: f64,
    inv_width: f64,
}

impl CantorFunction {
    fn build(lambda: f64, mode: CantorMode, extended: bool) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in (0,1), got {lambda}"
            )));
        }
        Ok(CantorFunction {
            lambda,
            mode,
            extended,
            lo: (1.0 - lambda) / 2.0,
            hi: (1.0 + lambda) / 2.0,
            inv_width: 2.0 / (1.0 - lambda),
        })
    }

    /// Fixed-point evaluator on `[0,1]` with the default tolerance `2^-46`.
    pub fn exact(lambda: f64) -> Result<Self> {
        Self::exact_with_tolerance(lambda, EXACT_TOLERANCE)
    }

    pub fn exact_with_tolerance(lambda: f64, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        Self::build(lambda, CantorMode::Exact { tolerance }, false)
    }

    /// `n`-fold application of the construction map to `base`.
    pub fn iterate(lambda: f64, n: u32, base: CantorBase) -> Result<Self> {
        Self::build(lambda, CantorMode::Iterate { n, base }, false)
    }

    /// Extends the function to the whole line: 0 below 0 and 1 above 1.
    pub fn extended(mut self) -> Self {
        self.extended = true;
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mode(&self) -> &CantorMode {
        &self.mode
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    /// Number of map applications an iterate performs; `None` in exact mode.
    pub fn iterate_order(&self) -> Option<u32> {
        match &self.mode {
            CantorMode::Iterate { n, .. } => Some(*n),
            CantorMode::Exact { .. } => None,
        }
    }

    /// Evaluates the function.
    ///
    /// Outside `[0,1]` this is a domain error unless the function was
    /// `extended()`, in which case the clamp values 0 and 1 are exact.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            if self.extended {
                return Ok(if x < 0.0 { 0.0 } else { 1.0 });
            }
            return Err(Error::Domain(format!(
                "x = {x} outside [0,1] and the function is not extended"
            )));
        }
        Ok(self.eval_unit(x))
    }

    /// Evaluation on `[0,1]` without the domain check (hot path).
    #[inline]
    pub fn eval_unit(&self, x: f64) -> f64 {
        match &self.mode {
            CantorMode::Exact { tolerance } => self.eval_exact(x, *tolerance),
            CantorMode::Iterate { n, base } => self.eval_iterate(x, *n, base),
        }
    }

    #[inline]
    fn eval_exact(&self, x: f64, tolerance: f64) -> f64 {
        // Endpoints are exact consequences of the fixed-point equation:
        // c(0) = c(0)/2 and c(1) = 1/2 + c(1)/2.
        if x == 0.0 {
            return 0.0;
        }
        if x == 1.0 {
            return 1.0;
        }
        let max_depth = (1.0 / tolerance).log2().ceil() as u32;
        let mut value = 0.0;
        let mut scale = 1.0;
        let mut xx = x;
        for _ in 0..max_depth {
            if xx >= self.lo {
                if xx < self.hi {
                    return value + 0.5 * scale;
                }
                value += 0.5 * scale;
                xx = (xx - self.hi) * self.inv_width;
            } else {
                xx *= self.inv_width;
            }
            scale *= 0.5;
            if xx <= 0.0 {
                return value;
            }
            if xx >= 1.0 {
                return value + scale;
            }
        }
        // Bracket midpoint: the true value lies in [value, value + scale].
        value + 0.5 * scale
    }

    #[inline]
    fn eval_iterate(&self, x: f64, n: u32, base: &CantorBase) -> f64 {
        let mut value = 0.0;
        let mut scale = 1.0;
        let mut xx = x;
        let mut k = n;
        while k > 0 {
            if xx >= self.lo && xx < self.hi {
                // Plateau value is exact for every remaining application.
                return value + 0.5 * scale;
            }
            if xx < self.lo {
                xx *= self.inv_width;
            } else {
                value += 0.5 * scale;
                xx = (xx - self.hi) * self.inv_width;
            }
            scale *= 0.5;
            xx = xx.clamp(0.0, 1.0);
            k -= 1;
        }
        value + scale * base.eval(xx)
    }
}

/// Builds the iterate `c_n` from `base`; evaluating the result applies the
/// construction map exactly `n` times per call.
pub fn build_iterate(lambda: f64, n: u32, base: CantorBase) -> Result<CantorFunction> {
    CantorFunction::iterate(lambda, n, base)
}

/// Tail bound `2^{-n+1} * sup01` for the distance between the limit and the
/// `n`-th iterate, where `sup01` is the sup distance between iterates 0 and 1.
pub fn iterate_error_bound(n: u32, sup01: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "the tail bound is stated for n >= 1".into(),
        ));
    }
    if !(sup01 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sup01 must be nonnegative, got {sup01}"
        )));
    }
    Ok((2.0f64).powi(1 - n as i32) * sup01)
}

/// Hölder exponent of the middle-λ Cantor function.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HolderExponentLambda {
    pub lambda: f64,
    pub value: f64,
}

/// `H_λ = log 2 / (log 2 - log(1-λ))`, strictly decreasing in λ.
pub fn holder_lambda(lambda: f64) -> Result<HolderExponentLambda> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must lie in (0,1), got {lambda}"
        )));
    }
    let ln2 = std::f64::consts::LN_2;
    Ok(HolderExponentLambda {
        lambda,
        value: ln2 / (ln2 - (1.0 - lambda).ln()),
    })
}
