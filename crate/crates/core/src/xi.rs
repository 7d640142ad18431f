//! The limiting zero measure `Ξ = 2·Leb|B₃ + (arc length on ∂B₁∩∂B₃) +
//! √2|τ|·(length on ∂B₁∩∂B₂)` and the distributional-Laplacian check
//! `∫ p Δf = ∫ f dΞ`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{limit_p, ComplexParam, Rect};
use crate::quad::{integrate_panels, QuadSpec};

/// A compactly supported scalar test function on the β-plane.
pub trait TestFunction: Sync {
    fn value(&self, beta: Complex64) -> f64;

    /// Exact Laplacian when known; otherwise a five-point stencil is used.
    fn laplacian(&self, _beta: Complex64) -> Option<f64> {
        None
    }

    /// A rectangle containing the support.
    fn support(&self) -> Rect;
}

/// Smooth radial bump `scale · exp(−1/(1 − r²/R²))` on the disk of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Complex64,
    pub radius: f64,
    pub scale: f64,
}

impl Bump {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Bump { center, radius, scale: 1.0 }
    }
}

impl TestFunction for Bump {
    fn value(&self, beta: Complex64) -> f64 {
        let u = (beta - self.center).norm_sqr() / (self.radius * self.radius);
        if u >= 1.0 {
            0.0
        } else {
            self.scale * (-1.0 / (1.0 - u)).exp()
        }
    }

    fn laplacian(&self, beta: Complex64) -> Option<f64> {
        let r2 = self.radius * self.radius;
        let u = (beta - self.center).norm_sqr() / r2;
        if u >= 1.0 {
            return Some(0.0);
        }
        let q = 1.0 - u;
        let f = (-1.0 / q).exp();
        let fu = -f / (q * q);
        let fuu = f / q.powi(4) - 2.0 * f / q.powi(3);
        Some(self.scale * 4.0 / r2 * (u * fuu + fu))
    }

    fn support(&self) -> Rect {
        Rect::new(
            self.center.re - self.radius,
            self.center.re + self.radius,
            self.center.im - self.radius,
            self.center.im + self.radius,
        )
    }
}

/// Wraps a closure with a declared support rectangle.
pub struct FnTest<F> {
    pub f: F,
    pub support: Rect,
}

impl<F: Fn(Complex64) -> f64 + Sync> TestFunction for FnTest<F> {
    fn value(&self, beta: Complex64) -> f64 {
        (self.f)(beta)
    }

    fn support(&self) -> Rect {
        self.support
    }
}

/// Descriptor of the three components of `Ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiMeasure {
    /// Density of the area part on `B₃`.
    pub area_density: f64,
    /// Total length of the two arcs of the unit circle with `|σ| < 1/√2`.
    pub arc_length: f64,
    /// Mass carried by each of the four segments `|σ|+|τ| = √2, |σ| > 1/√2`.
    pub segment_mass: f64,
}

impl Default for XiMeasure {
    fn default() -> Self {
        XiMeasure { area_density: 2.0, arc_length: std::f64::consts::PI, segment_mass: 0.5 }
    }
}

impl XiMeasure {
    /// Density of the segment component per unit length at `τ`.
    pub fn segment_density(tau: f64) -> f64 {
        SQRT_2 * tau.abs()
    }
}

/// Result of integrating a test function against `Ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiIntegral {
    pub value: f64,
    pub error: f64,
    pub area: f64,
    pub arcs: f64,
    pub segments: f64,
}

fn clip(a: f64, b: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let (a, b) = (a.max(lo), b.min(hi));
    (b > a).then_some((a, b))
}

const PANELS: usize = 16;

/// `∫ f dΞ` for compactly supported `f`, with an absolute error estimate.
pub fn xi_integrate<T: TestFunction + ?Sized>(f: &T, quad: &QuadSpec) -> Result<XiIntegral> {
    let supp = f.support();
    if !supp.is_valid() {
        return Err(Error::InvalidParameter("support rectangle is empty or non-finite".into()));
    }
    let mut err = 0.0;

    // Area part: σ outer, τ inner with the exact B₃ limits.
    let mut area = 0.0;
    if let Some((s0, s1)) = clip(supp.re0, supp.re1, -FRAC_1_SQRT_2, FRAC_1_SQRT_2) {
        let inner_spec = QuadSpec {
            abs_tol: quad.abs_tol * 0.1 / (s1 - s0).max(1e-300),
            rel_tol: quad.rel_tol * 0.1,
            max_intervals: quad.max_intervals,
        };
        let mut inner_err: f64 = 0.0;
        let mut inner_fail = None;
        let outer = integrate_panels(
            |s: f64| {
                let edge = (1.0 - s * s).max(0.0).sqrt();
                let mut acc = 0.0;
                for (lo, hi) in [(edge, supp.im1), (supp.im0, -edge)] {
                    if let Some((t0, t1)) = clip(supp.im0, supp.im1, lo, hi) {
                        match integrate_panels(
                            |t: f64| f.value(Complex64::new(s, t)),
                            t0,
                            t1,
                            PANELS,
                            &inner_spec,
                        ) {
                            Ok(e) => {
                                acc += e.value;
                                inner_err = inner_err.max(e.error);
                            }
                            Err(e) => inner_fail = Some(e),
                        }
                    }
                }
                acc
            },
            s0,
            s1,
            PANELS,
            quad,
        )?;
        if let Some(e) = inner_fail {
            return Err(e);
        }
        area = 2.0 * outer.value;
        err += 2.0 * (outer.error + inner_err * (s1 - s0));
    }

    // Arcs: θ ∈ (π/4, 3π/4) and (−3π/4, −π/4) on the unit circle.
    let mut arcs = 0.0;
    for (lo, hi) in [(FRAC_PI_4, 3.0 * FRAC_PI_4), (-3.0 * FRAC_PI_4, -FRAC_PI_4)] {
        if let Some((a, b)) = arc_window(&supp, lo, hi) {
            let e = integrate_panels(
                |th: f64| f.value(Complex64::new(th.cos(), th.sin())),
                a,
                b,
                PANELS,
                quad,
            )?;
            arcs += e.value;
            err += e.error;
        }
    }

    // Segments: (±u, ±(√2 − u)), u ∈ [1/√2, √2], weight √2τ · √2 du.
    let mut segments = 0.0;
    for (ss, ts) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        let (u0, u1) = segment_window(&supp, ss, ts);
        if u1 > u0 {
            let e = integrate_panels(
                |u: f64| 2.0 * (SQRT_2 - u) * f.value(Complex64::new(ss * u, ts * (SQRT_2 - u))),
                u0,
                u1,
                PANELS,
                quad,
            )?;
            segments += e.value;
            err += e.error;
        }
    }

    Ok(XiIntegral { value: area + arcs + segments, error: err, area, arcs, segments })
}

/// Hull of the θ-range of the arc `[lo, hi]` that lies inside `supp`.
fn arc_window(supp: &Rect, lo: f64, hi: f64) -> Option<(f64, f64)> {
    const SAMPLES: usize = 4096;
    let step = (hi - lo) / SAMPLES as f64;
    let grown = supp.expand(1e-12);
    let mut first = None;
    let mut last = None;
    for i in 0..=SAMPLES {
        let th = lo + step * i as f64;
        if grown.contains(Complex64::new(th.cos(), th.sin())) {
            first.get_or_insert(th);
            last = Some(th);
        }
    }
    let (a, b) = (first?, last?);
    Some(((a - step).max(lo), (b + step).min(hi)))
}

/// Range of `u` for which the segment point lies in `supp`.
fn segment_window(supp: &Rect, ss: f64, ts: f64) -> (f64, f64) {
    // σ = ss·u ∈ [re0, re1], τ = ts·(√2 − u) ∈ [im0, im1]
    let (mut lo, mut hi) = (FRAC_1_SQRT_2, SQRT_2);
    let (a, b) = if ss > 0.0 { (supp.re0, supp.re1) } else { (-supp.re1, -supp.re0) };
    lo = lo.max(a);
    hi = hi.min(b);
    let (c, d) = if ts > 0.0 { (supp.im0, supp.im1) } else { (-supp.im1, -supp.im0) };
    // √2 − u ∈ [c, d]  ⇔  u ∈ [√2 − d, √2 − c]
    lo = lo.max(SQRT_2 - d);
    hi = hi.min(SQRT_2 - c);
    (lo, hi)
}

/// Rectangular midpoint grid covering a test function's support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rect: Rect,
    pub step: f64,
}

/// Returns `(Σ p·Δf·h², ∫ f dΞ)`. The two agree in the limit of small
/// mesh because `Δp = Ξ` in the sense of distributions.
pub fn laplacian_consistency<T: TestFunction + ?Sized>(grid: &GridSpec, f: &T) -> Result<(f64, f64)> {
    let supp = f.support();
    if !grid.rect.contains_rect(&supp) {
        return Err(Error::InvalidParameter("grid does not cover the test-function support".into()));
    }
    let limit = supp.diameter() / 16.0;
    if !(grid.step > 0.0) || grid.step > limit {
        return Err(Error::MeshTooCoarse { step: grid.step, limit });
    }
    let h = grid.step;
    let ns = (supp.width() / h).ceil() as usize + 2;
    let nt = (supp.height() / h).ceil() as usize + 2;
    // cells aligned to the grid origin, restricted to the support
    let i0 = ((supp.re0 - grid.rect.re0) / h).floor() as i64 - 1;
    let j0 = ((supp.im0 - grid.rect.im0) / h).floor() as i64 - 1;
    let mut lhs = 0.0;
    let mut comp = 0.0;
    for i in 0..ns as i64 + 1 {
        let s = grid.rect.re0 + (i0 + i) as f64 * h + 0.5 * h;
        for j in 0..nt as i64 + 1 {
            let t = grid.rect.im0 + (j0 + j) as f64 * h + 0.5 * h;
            let z = Complex64::new(s, t);
            let lap = match f.laplacian(z) {
                Some(l) => l,
                None => {
                    let c = f.value(z);
                    let d = Complex64::new(h, 0.0);
                    let e = Complex64::new(0.0, h);
                    (f.value(z + d) + f.value(z - d) + f.value(z + e) + f.value(z - e) - 4.0 * c)
                        / (h * h)
                }
            };
            if lap == 0.0 {
                continue;
            }
            // Neumaier accumulation
            let term = limit_p(ComplexParam::new(s, t)) * lap * h * h;
            let sum = lhs + term;
            if lhs.abs() >= term.abs() {
                comp += (lhs - sum) + term;
            } else {
                comp += (term - sum) + lhs;
            }
            lhs = sum;
        }
    }
    let rhs = xi_integrate(f, &QuadSpec { abs_tol: 1e-11, rel_tol: 1e-10, max_intervals: 20_000 })?;
    Ok((lhs + comp, rhs.value))
}
