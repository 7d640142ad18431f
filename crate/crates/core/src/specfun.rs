//! Gaussian special functions at complex argument: the normal
//! distribution function `Φ`, truncated exponential moments and their
//! saddle-point asymptotics.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|z|` beyond which `Φ` switches to its one-term sector asymptotics.
pub const ASYMPTOTIC_RADIUS: f64 = 26.0;
/// Angular margin of the asymptotic sectors.
pub const SECTOR_EPS: f64 = 0.1;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Which evaluation path produced a value of `Φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiBranch {
    /// Rational expansion in a Möbius-mapped variable (moderate `|z|`).
    Series,
    /// Laplace continued fraction (large `|z|` inside the working disk).
    ContinuedFraction,
    /// `−e^{−z²/2}/(√(2π) z)`, valid for `|arg z| > π/4 + ε`.
    AsymptoticLower,
    /// `1 − e^{−z²/2}/(√(2π) z)`, valid for `|arg z| < 3π/4 − ε`.
    AsymptoticUpper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiResult {
    pub value: Complex64,
    /// Principal branch of `log Φ(z)`; finite even when `value` over- or
    /// underflows.
    pub log_value: Complex64,
    pub branch_used: PhiBranch,
}

const WEIDEMAN_TERMS: usize = 48;
const CF_RADIUS: f64 = 12.0;
const CF_DEPTH: usize = 60;

struct Weideman {
    l: f64,
    coeffs: [f64; WEIDEMAN_TERMS],
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_TERMS;
        let m = 2 * n;
        let l = (n as f64 / SQRT_2).sqrt();
        let sample = |k: usize| {
            let t = l * (k as f64 * PI / (2 * m) as f64).tan();
            (-t * t).exp() * (l * l + t * t)
        };
        let mut coeffs = [0.0; WEIDEMAN_TERMS];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let jj = (j + 1) as f64;
            let mut acc = sample(0);
            for k in 1..m {
                acc += 2.0 * sample(k) * (PI * jj * k as f64 / m as f64).cos();
            }
            *c = acc / (2 * m) as f64;
        }
        Weideman { l, coeffs }
    })
}

/// Faddeeva function `w(ζ) = e^{−ζ²} erfc(−iζ)` for `Im ζ ≥ 0`.
fn faddeeva_upper(zeta: Complex64) -> (Complex64, PhiBranch) {
    debug_assert!(zeta.im >= 0.0);
    let i = Complex64::i();
    if zeta.norm() >= CF_RADIUS {
        let mut t = zeta;
        for k in (1..=CF_DEPTH).rev() {
            t = zeta - (k as f64 * 0.5) / t;
        }
        return (i * FRAC_1_SQRT_PI / t, PhiBranch::ContinuedFraction);
    }
    let tab = weideman();
    let denom = tab.l - i * zeta;
    let z = (tab.l + i * zeta) / denom;
    let mut p = Complex64::new(0.0, 0.0);
    for c in tab.coeffs.iter().rev() {
        p = p * z + c;
    }
    (2.0 * p / (denom * denom) + FRAC_1_SQRT_PI / denom, PhiBranch::Series)
}

fn principal(z: Complex64) -> Complex64 {
    let mut im = z.im % (2.0 * PI);
    if im > PI {
        im -= 2.0 * PI;
    } else if im <= -PI {
        im += 2.0 * PI;
    }
    Complex64::new(z.re, im)
}

fn exp_or_overflow(l: Complex64) -> Complex64 {
    if l.re > 709.0 {
        Complex64::from_polar(f64::INFINITY, l.im)
    } else {
        l.exp()
    }
}

/// Normal distribution function continued analytically to `z ∈ ℂ`.
pub fn phi_complex(z: Complex64) -> PhiResult {
    if z.norm() > ASYMPTOTIC_RADIUS {
        return phi_asymptotic(z);
    }
    let half_sq = z * z * 0.5;
    if z.re <= 0.0 {
        // Φ(z) = ½ e^{−z²/2} w(−iz/√2) with Im(−iz/√2) = −Re z/√2 ≥ 0
        let zeta = Complex64::new(z.im, -z.re) * FRAC_1_SQRT_2;
        let (w, branch) = faddeeva_upper(zeta);
        let value = 0.5 * (-half_sq).exp() * w;
        let log_value = principal(Complex64::new(0.5f64.ln(), 0.0) - half_sq + w.ln());
        PhiResult { value, log_value, branch_used: branch }
    } else {
        let zeta = Complex64::new(-z.im, z.re) * FRAC_1_SQRT_2;
        let (w, branch) = faddeeva_upper(zeta);
        let q = 0.5 * (-half_sq).exp() * w;
        let value = 1.0 - q;
        PhiResult { value, log_value: value.ln(), branch_used: branch }
    }
}

fn phi_asymptotic(z: Complex64) -> PhiResult {
    // log of e^{−z²/2}/(√(2π) z)
    let l = -z * z * 0.5 - LN_SQRT_2PI - z.ln();
    if z.arg().abs() > FRAC_PI_2 {
        let log_value = principal(l + Complex64::new(0.0, PI));
        PhiResult {
            value: exp_or_overflow(log_value),
            log_value,
            branch_used: PhiBranch::AsymptoticLower,
        }
    } else {
        let (value, log_value) = if l.re < -40.0 {
            let t = l.exp();
            (1.0 - t, -t)
        } else if l.re > 40.0 {
            let lv = principal(l + Complex64::new(0.0, PI) - (-l).exp());
            (exp_or_overflow(lv), lv)
        } else {
            let v = 1.0 - l.exp();
            (v, v.ln())
        };
        PhiResult { value, log_value, branch_used: PhiBranch::AsymptoticUpper }
    }
}

/// Real normal distribution function.
pub fn phi_real(x: f64) -> f64 {
    phi_complex(Complex64::new(x, 0.0)).value.re
}

/// Upper cutoff of a truncated moment; `Infinite` is the untruncated case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cutoff {
    Finite(f64),
    Infinite,
}

impl From<f64> for Cutoff {
    fn from(a: f64) -> Self {
        Cutoff::Finite(a)
    }
}

/// `log E[e^{wX} 1_{X<a}] = w²/2 + log Φ(a − w)`.
pub fn ln_truncated_exp_moment(w: Complex64, a: Cutoff) -> Complex64 {
    let half_sq = w * w * 0.5;
    match a {
        Cutoff::Infinite => half_sq,
        Cutoff::Finite(a) if a == f64::NEG_INFINITY => Complex64::new(f64::NEG_INFINITY, 0.0),
        Cutoff::Finite(a) => principal(half_sq + phi_complex(a - w).log_value),
    }
}

/// `E[e^{wX} 1_{X<a}]` for standard normal `X`.
pub fn truncated_exp_moment(w: Complex64, a: Cutoff) -> Complex64 {
    let half_sq = w * w * 0.5;
    match a {
        Cutoff::Infinite => exp_or_overflow(half_sq),
        Cutoff::Finite(a) if a == f64::NEG_INFINITY => Complex64::new(0.0, 0.0),
        Cutoff::Finite(a) => {
            let phi = phi_complex(a - w);
            let direct = matches!(phi.branch_used, PhiBranch::Series | PhiBranch::ContinuedFraction);
            if direct && half_sq.re.abs() < 700.0 {
                half_sq.exp() * phi.value
            } else {
                exp_or_overflow(half_sq + phi.log_value)
            }
        }
    }
}

/// `E[e^{wX} 1_{X>a}] = e^{w²/2} Φ(w − a)`.
pub fn upper_truncated_exp_moment(w: Complex64, a: f64) -> Complex64 {
    let half_sq = w * w * 0.5;
    exp_or_overflow(half_sq + phi_complex(w - a).log_value)
}

fn bivariate_shift(s: f64, sigma: f64, tau: f64, rho: f64) -> (f64, Complex64) {
    let damp = -0.5 * s * s * tau * tau * (1.0 - rho * rho);
    (damp, Complex64::new(s * sigma, s * tau * rho))
}

/// `log E[e^{s(σX + iτY)} 1_{X<a}]` for standard Gaussians with correlation `ρ`.
pub fn ln_truncated_exp_moment_bivariate(s: f64, sigma: f64, tau: f64, rho: f64, a: Cutoff) -> Complex64 {
    let (damp, w) = bivariate_shift(s, sigma, tau, rho);
    ln_truncated_exp_moment(w, a) + damp
}

/// `E[e^{s(σX + iτY)} 1_{X<a}] = e^{−s²τ²(1−ρ²)/2} E[e^{s(σ+iτρ)X} 1_{X<a}]`.
pub fn truncated_exp_moment_bivariate(s: f64, sigma: f64, tau: f64, rho: f64, a: Cutoff) -> Result<Complex64> {
    if !(rho.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("|rho| must be <= 1, got {rho}")));
    }
    let (damp, w) = bivariate_shift(s, sigma, tau, rho);
    let m = truncated_exp_moment(w, a);
    if m.norm().is_finite() && m.norm() > 0.0 {
        Ok(m * damp.exp())
    } else {
        Ok(exp_or_overflow(ln_truncated_exp_moment(w, a) + damp))
    }
}

/// Asymptotic regime of `F(n) = E[e^{w√n X} 1_{X<√n a(n)}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SaddleRegime {
    /// `u − |v| ≥ a`: the truncation point carries the integral.
    BoundaryDominated,
    /// `u + |v| < a`: the full Gaussian moment.
    SaddleDominated,
    /// `u − |v| < a < u + |v|`: both terms kept.
    TwoTerm,
    /// Real `w` with `a(n) = w + c/√n`.
    CriticalReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleApprox {
    pub value: Complex64,
    pub log_value: Complex64,
    pub regime: SaddleRegime,
}

/// Leading asymptotics of `F(n)`. `critical_c` supplies `c` in the
/// critical real case `a(n) = w + c/√n`.
pub fn saddle_asymptotic<A: Fn(f64) -> f64>(
    w: Complex64,
    a_seq: A,
    n: f64,
    critical_c: Option<f64>,
) -> Result<SaddleApprox> {
    if !(n > 0.0) {
        return Err(Error::InvalidParameter(format!("n must be positive, got {n}")));
    }
    let a = a_seq(n);
    if !a.is_finite() {
        return Err(Error::InvalidParameter("a(n) must be finite".into()));
    }
    let (u, v) = (w.re, w.im.abs());
    let saddle = w * w * (0.5 * n);
    let boundary = || {
        // log[(2πn)^{−1/2} (w − a)^{−1} e^{n(a w − a²/2)}]
        -0.5 * (2.0 * PI * n).ln() - (w - a).ln() + n * (a * w - 0.5 * a * a)
    };
    let finish = |log_value: Complex64, regime| {
        let log_value = principal(log_value);
        Ok(SaddleApprox { value: exp_or_overflow(log_value), log_value, regime })
    };
    if let (Some(c), true) = (critical_c, w.im == 0.0) {
        let lp = phi_complex(Complex64::new(c, 0.0)).log_value;
        return finish(saddle + lp, SaddleRegime::CriticalReal);
    }
    if u + v == a {
        return Err(Error::AmbiguousRegime);
    }
    if u + v < a {
        finish(saddle, SaddleRegime::SaddleDominated)
    } else if u - v < a {
        let (s, b) = (saddle, boundary());
        // log(e^s + e^b) without overflow
        let m = if s.re > b.re { s } else { b };
        let sum = (s - m).exp() + (b - m).exp();
        finish(m + sum.ln(), SaddleRegime::TwoTerm)
    } else {
        finish(boundary(), SaddleRegime::BoundaryDominated)
    }
}

/// Dominating bounds `e^{aw − a²/2}`: the first entry bounds
/// `E[e^{wX}1_{X<a}]` (meaningful for `w > a`), the second bounds
/// `E[e^{wX}1_{X>a}]` (meaningful for `w < a`). The inapplicable entry is
/// `+∞`.
pub fn saddle_bounds_check(w: f64, a: f64) -> Result<(f64, f64)> {
    if w == a || !w.is_finite() || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("need finite w != a, got ({w}, {a})")));
    }
    let b = (a * w - 0.5 * a * a).exp();
    if w > a {
        Ok((b, f64::INFINITY))
    } else {
        Ok((f64::INFINITY, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // (re z, im z, Re log Φ(z), Im log Φ(z)) from a 40-digit evaluation,
    // cross-checked against path quadrature of the Gaussian density.
    const LOG_PHI: [(f64, f64, f64, f64); 14] = [
        (0.5, 0.5, -0.30448297842594910739, 0.24890574325971877894),
        (-1.5, 2.0, -0.96950690041125895474, -2.5060254193245334652),
        (3.0, -4.0, 0.55490200143221679705, -2.6383590706115356187),
        (-6.0, 1.0, -20.248643324037835353, -0.1258488870618294462),
        (-10.0, 0.1, -53.226332375327321089, 1.0098090256779976631),
        (2.0, 10.0, 44.767908604922483273, 0.62162113270519137339),
        (-20.0, 15.0, -91.638267716318526288, -0.95092616242425740221),
        (12.0, -3.0, -1.7616872783211140429e-32, 1.5431067502940042964e-31),
        (-4.0, -8.0, 20.897414424368026958, -1.6808401300963392961),
        (0.1, 25.0, 308.35878401525632285, -0.92519079132492616071),
        (-25.0, 0.2, -316.61943970385758349, -1.2752108722158124196),
        (18.0, 18.0, 0.0057709343519507535018, -0.01452216199357847504),
        (-18.0, 18.0, -4.1558898346222297272, -1.9417809744978919089),
        (0.0, 3.0, 2.648166971851291275, 1.5353985162412748635),
    ];

    #[test]
    fn phi_matches_high_precision_table() {
        for &(x, y, lr, li) in LOG_PHI.iter() {
            let r = phi_complex(c(x, y));
            let expect = c(lr, li).exp();
            let rel = (r.value - expect).norm() / expect.norm();
            assert!(rel < 1e-12, "z=({x},{y}) rel={rel:e} {:?}", r.branch_used);
            // log twin agrees in absolute terms (relative in the value)
            assert!((r.log_value - c(lr, li)).norm() < 1e-12 * (1.0 + lr.abs()));
        }
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_complex(c(0.0, 0.0)).value, c(0.5, 0.0));
        assert!((phi_real(1.0) - 0.841344746068543).abs() < 1e-15);
    }

    #[test]
    fn conjugation_symmetry() {
        for &(x, y, _, _) in LOG_PHI.iter() {
            let a = phi_complex(c(x, y)).value;
            let b = phi_complex(c(x, -y)).value;
            assert!((a.conj() - b).norm() <= 1e-14 * a.norm());
        }
    }

    #[test]
    fn weideman_and_fraction_agree_at_switch() {
        // both representations are accurate near the switch radius
        for k in 0..32 {
            let th = PI * k as f64 / 31.0;
            let zeta = Complex64::from_polar(CF_RADIUS + 1e-9, th);
            let (cf, _) = faddeeva_upper(zeta);
            let tab = weideman();
            let i = Complex64::i();
            let denom = tab.l - i * zeta;
            let z = (tab.l + i * zeta) / denom;
            let mut p = c(0.0, 0.0);
            for cc in tab.coeffs.iter().rev() {
                p = p * z + cc;
            }
            let wd = 2.0 * p / (denom * denom) + FRAC_1_SQRT_PI / denom;
            assert!((cf - wd).norm() < 1e-14 * wd.norm(), "{th}");
        }
    }

    #[test]
    fn truncated_moment_examples() {
        assert_eq!(truncated_exp_moment(c(0.0, 0.0), Cutoff::Infinite), c(1.0, 0.0));
        assert!((truncated_exp_moment(c(0.0, 0.0), Cutoff::Finite(0.0)) - 0.5).norm() < 1e-16);
        let m = truncated_exp_moment(c(1.0, 0.0), Cutoff::Infinite);
        assert!((m.re - 1.6487212707001282).abs() < 1e-15);
        assert_eq!(truncated_exp_moment(c(1.0, 2.0), Cutoff::Finite(f64::NEG_INFINITY)), c(0.0, 0.0));
    }

    #[test]
    fn bivariate_reduces() {
        let a = Cutoff::Finite(0.7);
        let b = truncated_exp_moment_bivariate(1.3, 0.4, 0.0, 0.0, a).unwrap();
        assert_eq!(b, truncated_exp_moment(c(1.3 * 0.4, 0.0), a));
        // untruncated closed form e^{s²(σ²−τ²+2iστρ)/2}
        let (s, sg, t, r) = (1.1, 0.8, 0.5, 0.3);
        let got = truncated_exp_moment_bivariate(s, sg, t, r, Cutoff::Infinite).unwrap();
        let want = (c(sg * sg - t * t, 2.0 * sg * t * r) * (0.5 * s * s)).exp();
        assert!((got - want).norm() < 1e-14 * want.norm());
        assert!(truncated_exp_moment_bivariate(1.0, 1.0, 1.0, 1.5, a).is_err());
    }

    #[test]
    fn bounds_examples() {
        let (lo, hi) = saddle_bounds_check(2.0, 1.0).unwrap();
        assert!(hi.is_infinite() && (lo - 1.5f64.exp()).abs() < 1e-14);
        assert!(truncated_exp_moment(c(2.0, 0.0), Cutoff::Finite(1.0)).re < lo);
        let (_, hi) = saddle_bounds_check(0.0, 1.0).unwrap();
        assert!(upper_truncated_exp_moment(c(0.0, 0.0), 1.0).re < hi);
        let (_, hi) = saddle_bounds_check(-1.0, 0.0).unwrap();
        assert!((hi - 1.0).abs() < 1e-15);
        assert!(upper_truncated_exp_moment(c(-1.0, 0.0), 0.0).re < 1.0);
        assert!(saddle_bounds_check(1.0, 1.0).is_err());
    }

    #[test]
    fn saddle_regimes() {
        let r = saddle_asymptotic(c(2.0, 0.0), |_| 1.0, 400.0, None).unwrap();
        assert_eq!(r.regime, SaddleRegime::BoundaryDominated);
        let exact = ln_truncated_exp_moment(c(40.0, 0.0), Cutoff::Finite(20.0));
        assert!(((r.log_value - exact).exp() - 1.0).norm() < 0.05);

        let w = c(0.3, 0.2);
        let r = saddle_asymptotic(w, |_| 1.0, 400.0, None).unwrap();
        assert_eq!(r.regime, SaddleRegime::SaddleDominated);
        let exact = ln_truncated_exp_moment(w * 20.0, Cutoff::Finite(20.0));
        assert!(((r.log_value - exact).exp() - 1.0).norm() < 0.05);

        let r = saddle_asymptotic(c(1.0, 0.0), |n: f64| 1.0 + 0.7 / n.sqrt(), 1e4, Some(0.7)).unwrap();
        assert_eq!(r.regime, SaddleRegime::CriticalReal);
        let ratio = (r.log_value - 0.5 * 1e4).exp();
        assert!((ratio.re - phi_real(0.7)).abs() < 1e-12);

        assert_eq!(saddle_asymptotic(c(0.5, 0.5), |_| 1.0, 10.0, None), Err(Error::AmbiguousRegime));
        let r = saddle_asymptotic(c(0.5, 1.0), |_| 1.0, 10.0, None).unwrap();
        assert_eq!(r.regime, SaddleRegime::TwoTerm);
    }
}
