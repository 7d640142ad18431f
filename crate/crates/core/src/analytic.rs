//! The two limiting random analytic functions: the plane Gaussian analytic
//! function `𝔾(t) = Σ ξ_k t^k / √(k!)` and the Poisson zeta function
//! `ζ_P(β) = lim_T (Σ_{P_k ≤ T} P_k^{−β} − T^{1−β}/(1−β))`.

use std::f64::consts::{E, FRAC_1_SQRT_2};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::Rect;
use crate::sampling::{poisson_arrivals, PoissonArrivals, SeedPath};
use crate::zeros::{locate_zeros, AnalyticHandle, LocateOptions, LogValue};

/// Truncated GAF: coefficients are pre-divided by `√(k!)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GafSample {
    pub coeffs: Vec<Complex64>,
    pub truncation_k: usize,
    /// Radius of the disk on which the truncation is certified.
    pub radius: f64,
    pub seed_path: SeedPath,
    scaled: Vec<Complex64>,
}

/// Smallest `K` with tail SD below `1e−8·e^{R²/2}`: `K ≥ e·R² + 40`.
pub fn gaf_truncation(radius: f64) -> usize {
    (E * radius * radius + 40.0).ceil() as usize
}

impl GafSample {
    pub fn new(radius: f64, seed_path: SeedPath) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("bad GAF radius {radius}")));
        }
        let k = gaf_truncation(radius);
        let mut rng = seed_path.rng();
        let coeffs: Vec<Complex64> = (0..=k)
            .map(|_| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                Complex64::new(a, b) * FRAC_1_SQRT_2
            })
            .collect();
        Ok(Self::from_coeffs(coeffs, radius, seed_path))
    }

    pub fn from_coeffs(coeffs: Vec<Complex64>, radius: f64, seed_path: SeedPath) -> Self {
        let mut scaled = Vec::with_capacity(coeffs.len());
        let mut f = 1.0;
        for (k, c) in coeffs.iter().enumerate() {
            if k > 0 {
                f /= (k as f64).sqrt();
            }
            scaled.push(c * f);
        }
        GafSample { truncation_k: coeffs.len() - 1, coeffs, radius, seed_path, scaled }
    }

    /// Sample with every coefficient conjugated.
    pub fn conjugate(&self) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| c.conj()).collect(), self.radius, self.seed_path)
    }

    fn check(&self, t: Complex64) -> Result<()> {
        if t.norm() > self.radius * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::OutsideCertifiedDisk(format!("{t}"), self.radius));
        }
        Ok(())
    }

    /// `(𝔾(t), 𝔾′(t))`.
    pub fn eval_with_derivative(&self, t: Complex64) -> Result<(Complex64, Complex64)> {
        self.check(t)?;
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in self.scaled.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        Ok((p, dp))
    }
}

pub fn gaf_eval(sample: &GafSample, t: Complex64) -> Result<Complex64> {
    Ok(sample.eval_with_derivative(t)?.0)
}

/// A GAF sample as a zero-finding target.
pub struct GafHandle<'a> {
    pub sample: &'a GafSample,
}

impl AnalyticHandle for GafHandle<'_> {
    fn eval(&self, z: Complex64) -> Result<LogValue> {
        Ok(LogValue::from_complex(gaf_eval(self.sample, z)?))
    }

    fn log_derivative(&self, z: Complex64) -> Option<Result<Complex64>> {
        Some(self.sample.eval_with_derivative(z).map(|(v, d)| d / v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GafZeroStats {
    pub mean_count: f64,
    pub counts: Vec<usize>,
}

/// Zero counts of independent GAF replicas in the disk `|t − center| < radius`.
pub fn gaf_zero_stats(center: Complex64, radius: f64, replicas: usize, seed: u64) -> Result<GafZeroStats> {
    if replicas == 0 {
        return Err(Error::InvalidParameter("replicas must be positive".into()));
    }
    if radius == 0.0 {
        return Ok(GafZeroStats { mean_count: 0.0, counts: vec![0; replicas] });
    }
    // square around the disk, slightly enlarged so the disk edge is interior
    let half = radius * 1.02;
    let rect = Rect::new(center.re - half, center.re + half, center.im - half, center.im + half);
    let cert = center.norm() + half * std::f64::consts::SQRT_2 + 1e-6;
    let mut counts = Vec::with_capacity(replicas);
    for r in 0..replicas as u64 {
        let sp = SeedPath::for_replica(seed, r, crate::sampling::Purpose::GafCoefficients);
        let g = GafSample::new(cert, sp)?;
        let zs = locate_zeros(&GafHandle { sample: &g }, rect, &LocateOptions::default())?;
        let c = zs
            .zeros
            .iter()
            .zip(&zs.multiplicities)
            .filter(|(z, _)| (*z - center).norm() < radius)
            .map(|(_, m)| *m as usize)
            .sum();
        counts.push(c);
    }
    let mean_count = counts.iter().sum::<usize>() as f64 / replicas as f64;
    Ok(GafZeroStats { mean_count, counts })
}

/// A realization of the Poisson zeta function, kept as raw arrivals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaPSample {
    pub arrivals: PoissonArrivals,
    pub seed_path: SeedPath,
    ln_p: Vec<f64>,
}

/// Below this real part evaluation converges slowly.
pub const SLOW_CONVERGENCE_SIGMA: f64 = 0.55;
pub const POLE_EXCLUSION: f64 = 1e-6;

/// `(e^u − 1)/u`, accurate near 0.
fn expm1_ratio(u: Complex64) -> Complex64 {
    if u.norm() < 1e-3 {
        1.0 + u * (0.5 + u * (1.0 / 6.0 + u / 24.0))
    } else {
        (u.exp() - 1.0) / u
    }
}

/// `∫_0^L x e^{ax} dx`.
fn weighted_exp_integral(a: Complex64, l: f64) -> Complex64 {
    if (a * l).norm() < 0.5 {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(l * l, 0.0);
        for k in 0..30 {
            sum += term / (k as f64 + 2.0);
            term = term * a * l / (k as f64 + 1.0);
        }
        sum
    } else {
        ((a * l).exp() * (a * l - 1.0) + 1.0) / (a * a)
    }
}

impl ZetaPSample {
    pub fn new(horizon: f64, seed_path: SeedPath) -> Result<Self> {
        let arrivals = poisson_arrivals(horizon, seed_path)?;
        Ok(Self::from_arrivals(arrivals, seed_path))
    }

    pub fn from_arrivals(arrivals: PoissonArrivals, seed_path: SeedPath) -> Self {
        let ln_p = arrivals.p.iter().map(|p| p.ln()).collect();
        ZetaPSample { arrivals, seed_path, ln_p }
    }

    pub fn horizon(&self) -> f64 {
        self.arrivals.horizon
    }

    fn check(beta: Complex64) -> Result<()> {
        if !(beta.re > 0.5) {
            return Err(Error::InvalidParameter(format!("Poisson zeta needs Re beta > 1/2, got {beta}")));
        }
        Ok(())
    }

    /// `(Σ P^{−β}, −Σ log P · P^{−β})` over the stored arrivals.
    fn sums(&self, beta: Complex64) -> (Complex64, Complex64) {
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = Complex64::new(0.0, 0.0);
        for &l in &self.ln_p {
            let t = (-beta * l).exp();
            s += t;
            ds -= t * l;
        }
        (s, ds)
    }

    /// `∫_1^T t^{−β} dt`.
    fn compensator(&self, beta: Complex64) -> Complex64 {
        let l = self.horizon().ln();
        l * expm1_ratio((1.0 - beta) * l)
    }

    /// `(ζ̃_P(β), ζ̃_P′(β))` at the sample's horizon.
    pub fn tilde_with_derivative(&self, beta: Complex64) -> Result<(Complex64, Complex64)> {
        Self::check(beta)?;
        let (s, ds) = self.sums(beta);
        let l = self.horizon().ln();
        let comp = self.compensator(beta);
        let dcomp = -weighted_exp_integral(1.0 - beta, l);
        Ok((s - comp, ds - dcomp))
    }

    /// `(ζ_P(β), ζ_P′(β))`.
    pub fn zeta_with_derivative(&self, beta: Complex64) -> Result<(Complex64, Complex64)> {
        if (beta - 1.0).norm() < POLE_EXCLUSION {
            return Err(Error::NearPole((beta - 1.0).norm()));
        }
        let (v, d) = self.tilde_with_derivative(beta)?;
        let inv = 1.0 / (beta - 1.0);
        Ok((v + inv, d - inv * inv))
    }

    /// Gaussian stand-in for the part of the series beyond the horizon,
    /// `Σ_{P>T} P^{−β} − ∫_T^∞ t^{−β} dt`, with its exact covariance.
    pub fn tail_draw<R: Rng + ?Sized>(&self, beta: Complex64, rng: &mut R) -> Result<Complex64> {
        Self::check(beta)?;
        let (vr, vi, c) = tail_covariance(beta, self.horizon());
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        let a = vr.sqrt();
        let (re, im) = if a > 0.0 {
            let b = c / a;
            let d = (vi - b * b).max(0.0).sqrt();
            (a * g1, b * g1 + d * g2)
        } else {
            (0.0, vi.sqrt() * g2)
        };
        Ok(Complex64::new(re, im))
    }
}

/// `(Var Re, Var Im, Cov)` of `Σ_{P>T} P^{−β} − ∫_T^∞ t^{−β} dt`.
pub fn tail_covariance(beta: Complex64, horizon: f64) -> (f64, f64, f64) {
    let s2 = 2.0 * beta.re - 1.0;
    let base = horizon.powf(-s2) / s2;
    let w = Complex64::new(s2, -2.0 * beta.im);
    let osc = (w * -horizon.ln()).exp() / w;
    (0.5 * (base + osc.re), 0.5 * (base - osc.re), -0.5 * osc.im)
}

pub fn zetap_tilde_eval(sample: &ZetaPSample, beta: Complex64) -> Result<Complex64> {
    Ok(sample.tilde_with_derivative(beta)?.0)
}

pub fn zetap_eval(sample: &ZetaPSample, beta: Complex64) -> Result<Complex64> {
    Ok(sample.zeta_with_derivative(beta)?.0)
}

/// Standard deviation of the truncation error, `√(T^{1−2σ}/(2σ−1))`.
pub fn zetap_tail_sd(sigma: f64, horizon: f64) -> f64 {
    (horizon.powf(1.0 - 2.0 * sigma) / (2.0 * sigma - 1.0)).sqrt()
}

/// Smallest horizon `T ≥ 1` whose tail SD is below `tol`.
pub fn zetap_choose_horizon(beta: Complex64, tol: f64) -> Result<f64> {
    let s = beta.re;
    if !(s > 0.5) || !(tol > 0.0) {
        return Err(Error::HorizonUnreachable(s));
    }
    let t = (tol * tol * (2.0 * s - 1.0)).powf(1.0 / (1.0 - 2.0 * s));
    Ok(t.max(1.0))
}

/// `ζ_P` (or `ζ̃_P`) of a fixed sample as a zero-finding target in `β`.
pub struct ZetaHandle<'a> {
    pub sample: &'a ZetaPSample,
    pub tilde: bool,
}

impl AnalyticHandle for ZetaHandle<'_> {
    fn eval(&self, z: Complex64) -> Result<LogValue> {
        let v = if self.tilde { zetap_tilde_eval(self.sample, z)? } else { zetap_eval(self.sample, z)? };
        Ok(LogValue::from_complex(v))
    }

    fn log_derivative(&self, z: Complex64) -> Option<Result<Complex64>> {
        let r = if self.tilde {
            self.sample.tilde_with_derivative(z)
        } else {
            self.sample.zeta_with_derivative(z)
        };
        Some(r.map(|(v, d)| d / v))
    }
}
