//! Evaluation of the partition function `Z_N(β) = Σ_k exp(√n(σX_k + iτY_k))`.
//!
//! All sums factor out the largest term modulus and accumulate in
//! deterministic 4096-term chunks with Neumaier compensation, so results do
//! not depend on thread count.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{ComplexParam, RemConfig};
use crate::sampling::SampleBatch;

pub const CHUNK: usize = 4096;
/// Sums smaller than this fraction of the largest term are reported as exact zeros.
pub const CANCELLATION_FLOOR: f64 = 1e-14;
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30;

/// `√(2n) − log(4πn) / (2√(2n))`, the location of the maximum of `eⁿ` standard normals.
pub fn compute_bn(n: f64) -> f64 {
    let s = (2.0 * n).sqrt();
    s - (4.0 * PI * n).ln() / (2.0 * s)
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ComplexAcc {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexAcc {
    #[inline]
    fn add(&mut self, w: f64, c: f64, s: f64) {
        self.re.add(w * c);
        self.im.add(w * s);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionValue {
    /// `log|Z_N|`, `−∞` for a total cancellation.
    pub log_modulus: f64,
    pub phase: f64,
    /// `max(0, log(largest term) − log|Z_N|)`.
    pub cancellation_index: f64,
}

impl PartitionValue {
    fn from_scaled(shift: f64, s: Complex64) -> Self {
        let m = s.norm();
        if !(m > CANCELLATION_FLOOR) {
            return PartitionValue {
                log_modulus: f64::NEG_INFINITY,
                phase: 0.0,
                cancellation_index: f64::INFINITY,
            };
        }
        PartitionValue {
            log_modulus: shift + m.ln(),
            phase: s.arg(),
            cancellation_index: (-m.ln()).max(0.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_modulus == f64::NEG_INFINITY
    }

    /// `log Z_N` on the principal branch.
    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.log_modulus, self.phase)
    }

    /// The value itself; overflows to infinity for large `log_modulus`.
    pub fn value(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_modulus.exp(), self.phase)
    }
}

fn check_batch(batch: &SampleBatch) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidParameter("empty sample batch".into()));
    }
    Ok(())
}

fn max_scaled(x: &[f64], a: f64) -> f64 {
    x.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(a * v))
}

/// Scaled sum `(shift, S)` with `Z = e^shift · S` and `max_k |term_k| / e^shift = 1`.
fn scaled_sum(batch: &SampleBatch, n: f64, beta: ComplexParam) -> (f64, Complex64) {
    let s = n.sqrt();
    let a = s * beta.sigma;
    let b = s * beta.tau;
    let shift = max_scaled(&batch.x, a);
    let mut total = ComplexAcc::default();
    for (xc, yc) in batch.x.chunks(CHUNK).zip(batch.y.chunks(CHUNK)) {
        let mut acc = ComplexAcc::default();
        for (&x, &y) in xc.iter().zip(yc) {
            let w = (a * x - shift).exp();
            let (sn, cs) = (b * y).sin_cos();
            acc.add(w, cs, sn);
        }
        let v = acc.value();
        total.re.add(v.re);
        total.im.add(v.im);
    }
    (shift, total.value())
}

pub fn eval_point(batch: &SampleBatch, n: f64, beta: ComplexParam) -> Result<PartitionValue> {
    check_batch(batch)?;
    let (shift, s) = scaled_sum(batch, n, beta);
    Ok(PartitionValue::from_scaled(shift, s))
}

/// `p_N(β) = log|Z_N(β)| / n`.
pub fn log_partition(batch: &SampleBatch, n: f64, beta: ComplexParam) -> Result<f64> {
    Ok(eval_point(batch, n, beta)?.log_modulus / n)
}

/// `Z_N(β)` and `Z_N'(β) / Z_N(β)` for the analytic model (`Y = X`).
pub fn eval_with_log_derivative(
    batch: &SampleBatch,
    n: f64,
    beta: Complex64,
) -> Result<(PartitionValue, Complex64)> {
    check_batch(batch)?;
    require_analytic(batch)?;
    let s = n.sqrt();
    let a = s * beta.re;
    let b = s * beta.im;
    let shift = max_scaled(&batch.x, a);
    let mut total = ComplexAcc::default();
    let mut dtotal = ComplexAcc::default();
    for xc in batch.x.chunks(CHUNK) {
        let mut acc = ComplexAcc::default();
        let mut dacc = ComplexAcc::default();
        for &x in xc {
            let w = (a * x - shift).exp();
            let (sn, cs) = (b * x).sin_cos();
            acc.add(w, cs, sn);
            dacc.add(w * x, cs, sn);
        }
        let v = acc.value();
        total.re.add(v.re);
        total.im.add(v.im);
        let dv = dacc.value();
        dtotal.re.add(dv.re);
        dtotal.im.add(dv.im);
    }
    let z = total.value();
    let dz = dtotal.value() * s;
    Ok((PartitionValue::from_scaled(shift, z), dz / z))
}

fn require_analytic(batch: &SampleBatch) -> Result<()> {
    if batch.rho != 1.0 {
        return Err(Error::FrameMismatch(format!(
            "analytic evaluation needs perfectly correlated phases, got rho = {}",
            batch.rho
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEval {
    pub sigma_axis: Vec<f64>,
    pub tau_axis: Vec<f64>,
    /// Row-major, `values[i][j]` at `(sigma_axis[i], tau_axis[j])`.
    pub values: Vec<Vec<PartitionValue>>,
    pub config: RemConfig,
}

impl GridEval {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "sigma,tau,log_modulus,phase,cancellation_index")?;
        for (i, s) in self.sigma_axis.iter().enumerate() {
            for (j, t) in self.tau_axis.iter().enumerate() {
                let v = &self.values[i][j];
                writeln!(w, "{s},{t},{},{},{}", v.log_modulus, v.phase, v.cancellation_index)?;
            }
        }
        Ok(())
    }
}

/// Bytes of scratch `eval_grid` will allocate.
pub fn grid_memory_estimate(len: usize, n_sigma: usize, n_tau: usize) -> usize {
    let chunks = len.div_ceil(CHUNK).max(1);
    let tables = (n_sigma + 2 * n_tau) * CHUNK * 8;
    let partials = chunks * n_sigma * n_tau * 16;
    let out = n_sigma * n_tau * 24;
    tables * rayon::current_num_threads() + partials + out
}

/// `Z_N` on a tensor grid. Each chunk computes one exponential per
/// `(σ, k)` and one rotation per `(τ, k)`; chunk partials are reduced in
/// order, so every node agrees with [`eval_point`] bit for bit.
pub fn eval_grid(
    batch: &SampleBatch,
    cfg: &RemConfig,
    sigma_axis: &[f64],
    tau_axis: &[f64],
    memory_budget: usize,
) -> Result<GridEval> {
    check_batch(batch)?;
    if sigma_axis.is_empty() || tau_axis.is_empty() {
        return Err(Error::InvalidParameter("empty grid axis".into()));
    }
    let sorted = |a: &[f64]| a.windows(2).all(|w| w[0] <= w[1]);
    if !sorted(sigma_axis) || !sorted(tau_axis) {
        return Err(Error::InvalidParameter("grid axes must be sorted".into()));
    }
    let needed = grid_memory_estimate(batch.len(), sigma_axis.len(), tau_axis.len());
    if needed > memory_budget {
        return Err(Error::MemoryBudget { needed, budget: memory_budget });
    }
    let n = cfg.n;
    let s = n.sqrt();
    let a_axis: Vec<f64> = sigma_axis.iter().map(|v| s * v).collect();
    let b_axis: Vec<f64> = tau_axis.iter().map(|v| s * v).collect();
    let shifts: Vec<f64> = a_axis.iter().map(|&a| max_scaled(&batch.x, a)).collect();
    let (ns, nt) = (a_axis.len(), b_axis.len());

    let partials: Vec<Vec<Complex64>> = batch
        .x
        .par_chunks(CHUNK)
        .zip(batch.y.par_chunks(CHUNK))
        .map(|(xc, yc)| {
            let len = xc.len();
            let mut cosv = vec![0.0; nt * len];
            let mut sinv = vec![0.0; nt * len];
            for (j, &b) in b_axis.iter().enumerate() {
                for (k, &y) in yc.iter().enumerate() {
                    let (sn, cs) = (b * y).sin_cos();
                    cosv[j * len + k] = cs;
                    sinv[j * len + k] = sn;
                }
            }
            let mut w = vec![0.0; len];
            let mut out = vec![Complex64::new(0.0, 0.0); ns * nt];
            for (i, &a) in a_axis.iter().enumerate() {
                for (k, &x) in xc.iter().enumerate() {
                    w[k] = (a * x - shifts[i]).exp();
                }
                for j in 0..nt {
                    let cs = &cosv[j * len..(j + 1) * len];
                    let sn = &sinv[j * len..(j + 1) * len];
                    let mut acc = ComplexAcc::default();
                    for k in 0..len {
                        acc.add(w[k], cs[k], sn[k]);
                    }
                    out[i * nt + j] = acc.value();
                }
            }
            out
        })
        .collect();

    let mut totals = vec![ComplexAcc::default(); ns * nt];
    for part in &partials {
        for (t, v) in totals.iter_mut().zip(part) {
            t.re.add(v.re);
            t.im.add(v.im);
        }
    }
    let values = (0..ns)
        .map(|i| (0..nt).map(|j| PartitionValue::from_scaled(shifts[i], totals[i * nt + j].value())).collect())
        .collect();
    Ok(GridEval {
        sigma_axis: sigma_axis.to_vec(),
        tau_axis: tau_axis.to_vec(),
        values,
        config: *cfg,
    })
}

/// Rescaled coordinates around a reference point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalFrame {
    /// `t ↦ β₀ + t/√n`, centred and normalized; needs `σ₀² < ½`, `τ₀ ≠ 0`.
    SqrtNB3,
    /// `s ↦ β₀(1 + (s + iδ_N)/n)` on the arc `σ² + τ² = 1`, `σ₀² < ½`.
    Boundary13,
    /// `s ↦ β₀ + (s + d_N′)/((β₀ − √2) n)` on the segment `σ + τ = √2`, `σ₀ > 1/√2`.
    Boundary12,
}

impl LocalFrame {
    pub fn as_str(self) -> &'static str {
        match self {
            LocalFrame::SqrtNB3 => "sqrt_n_B3",
            LocalFrame::Boundary13 => "boundary13",
            LocalFrame::Boundary12 => "boundary12",
        }
    }
}

pub const BOUNDARY_TOL: f64 = 1e-9;

fn check_arc13(beta0: ComplexParam) -> Result<()> {
    let (s, t) = (beta0.sigma, beta0.tau);
    if (s * s + t * t - 1.0).abs() > BOUNDARY_TOL || s * s >= 0.5 {
        return Err(Error::FrameMismatch(format!("{beta0} is not on the B1/B3 arc")));
    }
    Ok(())
}

fn check_segment12(beta0: ComplexParam) -> Result<()> {
    let (s, t) = (beta0.sigma, beta0.tau);
    if !(s > std::f64::consts::FRAC_1_SQRT_2 && t > 0.0) || (s + t - SQRT_2).abs() > BOUNDARY_TOL {
        return Err(Error::FrameMismatch(format!("{beta0} is not on the upper B1/B2 segment")));
    }
    Ok(())
}

/// `nσ₀τ₀` reduced into `[0, 2π)`.
pub fn delta_n(beta0: ComplexParam, n: f64) -> Result<f64> {
    check_arc13(beta0)?;
    let v = (n * beta0.sigma * beta0.tau).rem_euclid(2.0 * PI);
    Ok(if v >= 2.0 * PI { 0.0 } else { v })
}

/// Representative of `iτ₀²n − β₀ log(4πn)/(2√2)` modulo `2πi` with
/// imaginary part in `(−π, π]`.
pub fn d_n_prime(beta0: ComplexParam, n: f64) -> Result<Complex64> {
    check_segment12(beta0)?;
    let b = beta0.to_complex();
    let raw = Complex64::new(0.0, beta0.tau * beta0.tau * n) - b * ((4.0 * PI * n).ln() / (2.0 * SQRT_2));
    Ok(Complex64::new(raw.re, wrap_pi(raw.im)))
}

/// `d_N′ / (√2 τ₀)`.
pub fn d_n(beta0: ComplexParam, n: f64) -> Result<Complex64> {
    Ok(d_n_prime(beta0, n)? / (SQRT_2 * beta0.tau))
}

pub(crate) fn wrap_pi(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI { r + 2.0 * PI } else { r }
}

/// Rotation applied to `n(β − β₀)` in the boundary12 zero coordinates.
pub fn boundary12_rotation() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / 3.0)
}

/// `e^{2πi/3} n (β − β₀) − d_N` for a zero `β` near the segment point `β₀`.
pub fn boundary12_coordinate(beta: Complex64, beta0: ComplexParam, n: f64) -> Result<Complex64> {
    let d = d_n(beta0, n)?;
    Ok(boundary12_rotation() * n * (beta - beta0.to_complex()) - d)
}

/// Point `β` of the frame at local coordinate `t`.
pub fn frame_point(frame: LocalFrame, beta0: ComplexParam, n: f64, t: Complex64) -> Result<Complex64> {
    let b0 = beta0.to_complex();
    match frame {
        LocalFrame::SqrtNB3 => {
            if beta0.sigma * beta0.sigma >= 0.5 || beta0.tau == 0.0 {
                return Err(Error::FrameMismatch(format!("{beta0} needs sigma^2 < 1/2 and tau != 0")));
            }
            Ok(b0 + t / n.sqrt())
        }
        LocalFrame::Boundary13 => {
            let d = delta_n(beta0, n)?;
            Ok(b0 * (1.0 + (t + Complex64::new(0.0, d)) / n))
        }
        LocalFrame::Boundary12 => {
            let d = d_n_prime(beta0, n)?;
            Ok(b0 + (t + d) / ((b0 - SQRT_2) * n))
        }
    }
}

/// Logarithm of the frame's normalized process at `t`.
///
/// * `SqrtNB3`: `(Z_N(β) − N^{1+β²/2}) / N^{1/2+(σ₀+t/√n)²}`.
/// * `Boundary13`: `Z_N(β) / N^{1/2+(σ₀+β₀(s+iδ_N)/n)²}`, tending to `e^{−s} + 𝔾(0)`.
/// * `Boundary12`: `e^{−β√n b_N} Z_N(β)`, tending to `e^s + ζ_P(β₀/√2)`.
pub fn local_frame_eval(
    batch: &SampleBatch,
    n: f64,
    beta0: ComplexParam,
    frame: LocalFrame,
    t: Complex64,
) -> Result<Complex64> {
    check_batch(batch)?;
    require_analytic(batch)?;
    let beta = frame_point(frame, beta0, n, t)?;
    let z = eval_point(batch, n, ComplexParam::from(beta))?;
    let sig0 = Complex64::new(beta0.sigma, 0.0);
    match frame {
        LocalFrame::SqrtNB3 => {
            let ln_den = n * (0.5 + (sig0 + t / n.sqrt()).powi(2));
            let ln_mean = n * (1.0 + 0.5 * beta * beta);
            let mean = (ln_mean - ln_den).exp();
            let zpart = if z.is_zero() { Complex64::new(0.0, 0.0) } else { (z.ln() - ln_den).exp() };
            Ok(zpart - mean)
        }
        LocalFrame::Boundary13 => {
            let d = delta_n(beta0, n)?;
            let shift = beta0.to_complex() * (t + Complex64::new(0.0, d)) / n;
            let ln_den = n * (0.5 + (sig0 + shift).powi(2));
            if z.is_zero() {
                return Ok(Complex64::new(0.0, 0.0));
            }
            Ok((z.ln() - ln_den).exp())
        }
        LocalFrame::Boundary12 => {
            if z.is_zero() {
                return Ok(Complex64::new(0.0, 0.0));
            }
            Ok((z.ln() - beta * n.sqrt() * compute_bn(n)).exp())
        }
    }
}

/// Truncated moment expansion of `Z_N` on a disk, for the analytic model.
///
/// Energies are binned with width `h`; within a bin, `exp(δ√n (x − x_j))`
/// is replaced by its Taylor polynomial. Each evaluation then costs
/// `O(bins · order)` instead of `O(N)`.
#[derive(Debug, Clone)]
pub struct LocalExpansion {
    center: Complex64,
    radius: f64,
    sqrt_n: f64,
    bin_centers: Vec<f64>,
    /// `moments[j][m] = Σ_{k∈j} e^{β_c√n(x_k−x_j)} (x_k−x_j)^m / m!`
    moments: Vec<Vec<Complex64>>,
    /// Upper bound on the relative truncation error per bin.
    pub truncation_bound: f64,
}

impl LocalExpansion {
    pub fn new(batch: &SampleBatch, n: f64, center: Complex64, radius: f64) -> Result<Self> {
        check_batch(batch)?;
        require_analytic(batch)?;
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("expansion radius must be positive".into()));
        }
        let sqrt_n = n.sqrt();
        let order = 18usize;
        // |δ√n (x − x_j)| ≤ radius·√n·h/2 = 0.5
        let h = 1.0 / (radius * sqrt_n);
        let (lo, hi) = batch.x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let nbins = (((hi - lo) / h).floor() as usize + 1).max(1);
        let bin_centers: Vec<f64> = (0..nbins).map(|j| lo + (j as f64 + 0.5) * h).collect();
        let mut moments = vec![vec![Complex64::new(0.0, 0.0); order + 1]; nbins];
        let mut inv_fact = vec![1.0; order + 1];
        for m in 1..=order {
            inv_fact[m] = inv_fact[m - 1] / m as f64;
        }
        for &x in &batch.x {
            let j = (((x - lo) / h).floor() as usize).min(nbins - 1);
            let d = x - bin_centers[j];
            let w = (center * sqrt_n * d).exp();
            let mut p = 1.0;
            for m in 0..=order {
                moments[j][m] += w * (p * inv_fact[m]);
                p *= d;
            }
        }
        let rho = 0.5f64;
        let mut tail = 0.0;
        let mut term = rho.powi(order as i32 + 1) * inv_fact[order] / (order as f64 + 1.0);
        for m in order + 1..order + 40 {
            tail += term;
            term *= rho / (m as f64 + 1.0);
        }
        Ok(LocalExpansion {
            center,
            radius,
            sqrt_n,
            bin_centers,
            moments,
            truncation_bound: tail * (center.re.abs() / (2.0 * radius)).exp(),
        })
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn bins(&self) -> usize {
        self.bin_centers.len()
    }

    /// `Z_N(β)` and `Z_N'(β)/Z_N(β)` at a point of the disk.
    pub fn eval(&self, beta: Complex64) -> Result<(PartitionValue, Complex64)> {
        let delta = beta - self.center;
        if delta.norm() > self.radius * (1.0 + 1e-12) {
            return Err(Error::OutsideCertifiedDisk(format!("{beta}"), delta.norm()));
        }
        let u = delta * self.sqrt_n;
        let a = beta.re * self.sqrt_n;
        let shift = self.bin_centers.iter().fold(f64::NEG_INFINITY, |m, &c| m.max(a * c));
        let mut total = ComplexAcc::default();
        let mut dtotal = ComplexAcc::default();
        for (c, mom) in self.bin_centers.iter().zip(&self.moments) {
            // Horner for P(u) = Σ mom[m] u^m and P'(u)
            let mut p = Complex64::new(0.0, 0.0);
            let mut dp = Complex64::new(0.0, 0.0);
            for m in (0..mom.len()).rev() {
                dp = dp * u + p;
                p = p * u + mom[m];
            }
            let e = (beta * self.sqrt_n * c - shift).exp();
            let v = e * p;
            let dv = e * (p * (self.sqrt_n * c) + dp * self.sqrt_n);
            total.re.add(v.re);
            total.im.add(v.im);
            dtotal.re.add(dv.re);
            dtotal.im.add(dv.im);
        }
        let z = total.value();
        Ok((PartitionValue::from_scaled(shift, z), dtotal.value() / z))
    }
}
