//! Small statistical toolkit: moments, quantiles, Kolmogorov–Smirnov,
//! χ² uniformity and characteristic-function exponent regression.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn std_err(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Linear-interpolated quantile of unsorted data.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, q)
}

pub fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p(d: f64, ne: f64) -> f64 {
    let s = ne.sqrt();
    kolmogorov_survival((s + 0.12 + 0.11 / s) * d)
}

/// One-sample KS test against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> KsResult {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in v.iter().enumerate() {
        let f = cdf(*x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    KsResult { statistic: d, p_value: ks_p(d, n) }
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    KsResult { statistic: d, p_value: ks_p(d, ne) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

/// χ² test of equal cell probabilities.
pub fn chi_square_uniform(counts: &[u64]) -> Result<ChiSquareResult> {
    if counts.len() < 2 {
        return Err(Error::InsufficientData("need at least two cells".into()));
    }
    let total: u64 = counts.iter().sum();
    let expect = total as f64 / counts.len() as f64;
    let stat = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum::<f64>();
    let dof = (counts.len() - 1) as f64;
    let dist = ChiSquared::new(dof).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(ChiSquareResult { statistic: stat, dof, p_value: 1.0 - dist.cdf(stat) })
}

/// Upper tail of the χ² distribution.
pub fn chi_square_sf(stat: f64, dof: f64) -> Result<f64> {
    let dist = ChiSquared::new(dof).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(1.0 - dist.cdf(stat))
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, se_b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let se = if n > 2.0 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (a, b, se)
}

/// Exponent estimate from the empirical characteristic function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcfFit {
    pub alpha: f64,
    pub std_err: f64,
    pub moduli: Vec<f64>,
    pub ecf_abs: Vec<f64>,
}

/// `|φ̂(z)|` for an isotropic sample, averaged over `directions` angles.
pub fn ecf_abs(samples: &[Complex64], modulus: f64, directions: usize) -> f64 {
    let mut acc = 0.0;
    for d in 0..directions {
        let th = std::f64::consts::PI * d as f64 / directions as f64;
        let z = Complex64::from_polar(modulus, th);
        let mut s = Complex64::new(0.0, 0.0);
        for x in samples {
            // Re(z̄ x)
            let arg = z.re * x.re + z.im * x.im;
            s += Complex64::new(arg.cos(), arg.sin());
        }
        acc += (s / samples.len() as f64).norm();
    }
    acc / directions as f64
}

/// Regresses `log(−log|φ̂(z)|)` on `log|z|`. The `|z|` grid is chosen
/// from the sample so that `|φ̂|` spans roughly `[0.2, 0.9]`, where the
/// estimate is neither swamped by sampling noise nor by the bulk.
pub fn ecf_alpha_regression(samples: &[Complex64]) -> Result<EcfFit> {
    if samples.len() < 100 {
        return Err(Error::InsufficientData("ecf regression needs >= 100 samples".into()));
    }
    let mods: Vec<f64> = samples.iter().map(|s| s.norm()).collect();
    let scale = median(&mods);
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InsufficientData("degenerate sample scale".into()));
    }
    let dirs = 8;
    // bracket |z| where |φ̂| crosses the two levels
    let find = |level: f64| -> f64 {
        let (mut lo, mut hi) = (1e-4 / scale, 1e-4 / scale);
        while ecf_abs(samples, hi, dirs) > level && hi < 1e4 / scale {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..30 {
            let mid = (lo * hi).sqrt();
            if ecf_abs(samples, mid, dirs) > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo * hi).sqrt()
    };
    let z_hi_level = find(0.9);
    let z_lo_level = find(0.2);
    if !(z_lo_level > z_hi_level * 1.2) {
        return Err(Error::InsufficientData("ecf regression grid too narrow".into()));
    }
    let k = 12;
    let mut lx = Vec::with_capacity(k);
    let mut ly = Vec::with_capacity(k);
    let mut moduli = Vec::with_capacity(k);
    let mut vals = Vec::with_capacity(k);
    for i in 0..k {
        let t = i as f64 / (k - 1) as f64;
        let m = z_hi_level * (z_lo_level / z_hi_level).powf(t);
        let e = ecf_abs(samples, m, dirs);
        if e > 0.0 && e < 1.0 {
            lx.push(m.ln());
            ly.push((-e.ln()).ln());
            moduli.push(m);
            vals.push(e);
        }
    }
    if lx.len() < 4 {
        return Err(Error::InsufficientData("ecf regression ill-conditioned".into()));
    }
    let (_, b, se) = linear_fit(&lx, &ly);
    Ok(EcfFit { alpha: b, std_err: se, moduli, ecf_abs: vals })
}
