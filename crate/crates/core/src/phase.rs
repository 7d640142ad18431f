//! Inverse-temperature points, model configuration, the three-phase
//! diagram and the limiting log-partition function `p(β)`.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex inverse temperature `β = σ + iτ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexParam {
    pub sigma: f64,
    pub tau: f64,
}

impl ComplexParam {
    pub fn new(sigma: f64, tau: f64) -> Self {
        ComplexParam { sigma, tau }
    }

    pub fn try_new(sigma: f64, tau: f64) -> Result<Self> {
        if !sigma.is_finite() || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite beta ({sigma}, {tau})"
            )));
        }
        Ok(ComplexParam { sigma, tau })
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.sigma, self.tau)
    }

    pub fn conj(self) -> Self {
        ComplexParam::new(self.sigma, -self.tau)
    }

    pub fn abs(self) -> f64 {
        self.sigma.hypot(self.tau)
    }

    pub fn is_finite(self) -> bool {
        self.sigma.is_finite() && self.tau.is_finite()
    }
}

impl From<Complex64> for ComplexParam {
    fn from(z: Complex64) -> Self {
        ComplexParam::new(z.re, z.im)
    }
}

impl From<ComplexParam> for Complex64 {
    fn from(b: ComplexParam) -> Self {
        b.to_complex()
    }
}

impl fmt::Display for ComplexParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tau.is_sign_negative() {
            write!(f, "{}-{}i", self.sigma, -self.tau)
        } else {
            write!(f, "{}+{}i", self.sigma, self.tau)
        }
    }
}

/// Region of the phase diagram containing a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    B1,
    B2,
    B3,
    Boundary12,
    Boundary13,
    Boundary23,
    TriplePoint,
}

impl PhaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseLabel::B1 => "B1",
            PhaseLabel::B2 => "B2",
            PhaseLabel::B3 => "B3",
            PhaseLabel::Boundary12 => "Boundary12",
            PhaseLabel::Boundary13 => "Boundary13",
            PhaseLabel::Boundary23 => "Boundary23",
            PhaseLabel::TriplePoint => "TriplePoint",
        }
    }

    pub fn is_open_region(self) -> bool {
        matches!(self, PhaseLabel::B1 | PhaseLabel::B2 | PhaseLabel::B3)
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn sign(x: f64) -> Ordering {
    x.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
}

/// Sign of `2σ² − 1`, decided as `|σ|` against the double nearest `1/√2`.
fn sign_sigma_crit(sigma: f64) -> Ordering {
    sigma.abs().partial_cmp(&FRAC_1_SQRT_2).unwrap_or(Ordering::Equal)
}

/// Exact sign of `|σ| + |τ| − √2` (with `√2` the double constant).
fn sign_l1(sigma: f64, tau: f64) -> Ordering {
    let (s, e) = two_sum(sigma.abs(), tau.abs());
    sign((s - SQRT_2) + e)
}

/// Sign of `σ² + τ² − 1` in double-double arithmetic.
fn sign_l2(sigma: f64, tau: f64) -> Ordering {
    let (p1, e1) = two_prod(sigma, sigma);
    let (p2, e2) = two_prod(tau, tau);
    let (s, e3) = two_sum(p1, p2);
    sign((s - 1.0) + (e1 + e2 + e3))
}

/// Classifies `β` by exact tests of `2σ² ⋛ 1`, `|σ|+|τ| ⋛ √2` and
/// `σ²+τ² ⋛ 1`; no tolerance band is applied.
pub fn classify(beta: ComplexParam) -> PhaseLabel {
    use Ordering::*;
    let a = sign_sigma_crit(beta.sigma);
    let b = sign_l1(beta.sigma, beta.tau);
    let c = sign_l2(beta.sigma, beta.tau);
    if a == Greater && b == Greater {
        return PhaseLabel::B2;
    }
    if a == Less && c == Greater {
        return PhaseLabel::B3;
    }
    let in_closure2 = a != Less && b != Less;
    let in_closure3 = a != Greater && c != Less;
    match (in_closure2, in_closure3) {
        (false, false) => PhaseLabel::B1,
        _ if a == Equal && b == Equal => PhaseLabel::TriplePoint,
        (true, true) => PhaseLabel::Boundary23,
        (true, false) => PhaseLabel::Boundary12,
        (false, true) => PhaseLabel::Boundary13,
    }
}

fn p_b1(beta: ComplexParam) -> f64 {
    1.0 + 0.5 * (beta.sigma * beta.sigma - beta.tau * beta.tau)
}

fn p_b2(beta: ComplexParam) -> f64 {
    SQRT_2 * beta.sigma.abs()
}

fn p_b3(beta: ComplexParam) -> f64 {
    0.5 + beta.sigma * beta.sigma
}

const CONTINUITY_TOL: f64 = 1e-12;

/// Limit of `(1/n) log |Z_N(β)|`. On boundaries every adjacent formula is
/// evaluated and agreement is asserted.
pub fn limit_p(beta: ComplexParam) -> f64 {
    let check = |vals: &[f64]| -> f64 {
        for v in &vals[1..] {
            assert!(
                (v - vals[0]).abs() < CONTINUITY_TOL * vals[0].abs().max(1.0),
                "limit_p formulas disagree at {beta}: {vals:?}"
            );
        }
        vals[0]
    };
    match classify(beta) {
        PhaseLabel::B1 => p_b1(beta),
        PhaseLabel::B2 => p_b2(beta),
        PhaseLabel::B3 => p_b3(beta),
        PhaseLabel::Boundary12 => check(&[p_b1(beta), p_b2(beta)]),
        PhaseLabel::Boundary13 => check(&[p_b1(beta), p_b3(beta)]),
        PhaseLabel::Boundary23 => check(&[p_b2(beta), p_b3(beta)]),
        PhaseLabel::TriplePoint => check(&[p_b1(beta), p_b2(beta), p_b3(beta)]),
    }
}

/// Euclidean distance from `β` to the nearest phase boundary curve.
pub fn distance_to_boundaries(beta: ComplexParam) -> f64 {
    let (s, t) = (beta.sigma.abs(), beta.tau.abs());
    // arcs of the unit circle with |σ| < 1/√2
    let arc = {
        let theta = t.atan2(s);
        let lo = std::f64::consts::FRAC_PI_4;
        let clamped = theta.clamp(lo, std::f64::consts::FRAC_PI_2);
        let q = (clamped.cos(), clamped.sin());
        (s - q.0).hypot(t - q.1)
    };
    // segment σ+τ=√2 with σ ∈ [1/√2, √2]
    let seg = {
        let u = ((s - t) / SQRT_2 + SQRT_2) / 2.0;
        let u = u.clamp(FRAC_1_SQRT_2, SQRT_2);
        (s - u).hypot(t - (SQRT_2 - u))
    };
    // vertical line σ = 1/√2 with |τ| ≥ 1/√2
    let line = {
        let tt = t.max(FRAC_1_SQRT_2);
        (s - FRAC_1_SQRT_2).hypot(t - tt)
    };
    arc.min(seg).min(line)
}

/// Axis-aligned rectangle `[re0, re1] × [im0, im1]` in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
}

impl Rect {
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64) -> Self {
        Rect { re0, re1, im0, im1 }
    }

    pub fn width(&self) -> f64 {
        self.re1 - self.re0
    }

    pub fn height(&self) -> f64 {
        self.im1 - self.im0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re0 && z.re <= self.re1 && z.im >= self.im0 && z.im <= self.im1
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.re0 >= self.re0 && other.re1 <= self.re1 && other.im0 >= self.im0 && other.im1 <= self.im1
    }

    pub fn is_valid(&self) -> bool {
        self.re0.is_finite()
            && self.re1.is_finite()
            && self.im0.is_finite()
            && self.im1.is_finite()
            && self.re1 > self.re0
            && self.im1 > self.im0
    }

    pub fn translate(&self, d: Complex64) -> Rect {
        Rect::new(self.re0 + d.re, self.re1 + d.re, self.im0 + d.im, self.im1 + d.im)
    }

    pub fn expand(&self, m: f64) -> Rect {
        Rect::new(self.re0 - m, self.re1 + m, self.im0 - m, self.im1 + m)
    }
}

/// Model parameters: size, correlation and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemConfig {
    /// `log N`, recomputed from the integer count.
    pub n: f64,
    /// Number of summands.
    pub big_n: u64,
    pub rho: f64,
    pub seed: u64,
}

/// Largest `n` accepted without an explicit override.
pub const MAX_N_DEFAULT: f64 = 24.0;

impl RemConfig {
    /// `N = round(eⁿ)`, then `n = log N`.
    pub fn from_n(n: f64, rho: f64, seed: u64) -> Result<Self> {
        if n > MAX_N_DEFAULT {
            return Err(Error::PrecisionBudget(n));
        }
        Self::from_n_override(n, rho, seed)
    }

    /// Same as [`RemConfig::from_n`] without the precision-budget refusal.
    pub fn from_n_override(n: f64, rho: f64, seed: u64) -> Result<Self> {
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter(format!("n must be positive, got {n}")));
        }
        let big_n = n.exp().round().max(1.0) as u64;
        Self::from_count(big_n, rho, seed)
    }

    pub fn from_count(big_n: u64, rho: f64, seed: u64) -> Result<Self> {
        if big_n < 1 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if !(rho.abs() <= 1.0) {
            return Err(Error::InvalidParameter(format!("|rho| must be <= 1, got {rho}")));
        }
        let n = (big_n as f64).ln();
        Ok(RemConfig { n, big_n, rho, seed })
    }

    pub fn with_rho(self, rho: f64) -> Result<Self> {
        Self::from_count(self.big_n, rho, self.seed)
    }
}
