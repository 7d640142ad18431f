//! Zero localization for analytic functions by the argument principle:
//! adaptive winding numbers on cell boundaries, quadrisection, and Newton
//! refinement, plus point-process statistics of the resulting zero sets.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{ZetaHandle, ZetaPSample};
use crate::error::{Error, Result};
use crate::partition::{eval_with_log_derivative, wrap_pi, LocalExpansion};
use crate::phase::{distance_to_boundaries, ComplexParam, Rect};
use crate::sampling::SampleBatch;
use crate::xi::TestFunction;

/// `log h = ln_abs + i·arg`; `ln_abs = −∞` encodes an exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub ln_abs: f64,
    pub arg: f64,
}

impl LogValue {
    pub fn from_complex(v: Complex64) -> Self {
        LogValue { ln_abs: v.norm().ln(), arg: v.arg() }
    }
}

/// An analytic function given by its logarithm (so huge or tiny values are fine).
pub trait AnalyticHandle: Sync {
    fn eval(&self, z: Complex64) -> Result<LogValue>;

    /// `h′(z)/h(z)`, when available in closed form.
    fn log_derivative(&self, _z: Complex64) -> Option<Result<Complex64>> {
        None
    }
}

/// Closure-backed handle, mainly for tests and small utilities.
pub struct FnHandle<F, D> {
    pub f: F,
    pub df: Option<D>,
}

impl<F> FnHandle<F, fn(Complex64) -> Complex64>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    pub fn new(f: F) -> Self {
        FnHandle { f, df: None }
    }
}

impl<F, D> AnalyticHandle for FnHandle<F, D>
where
    F: Fn(Complex64) -> Complex64 + Sync,
    D: Fn(Complex64) -> Complex64 + Sync,
{
    fn eval(&self, z: Complex64) -> Result<LogValue> {
        Ok(LogValue::from_complex((self.f)(z)))
    }

    fn log_derivative(&self, z: Complex64) -> Option<Result<Complex64>> {
        self.df.as_ref().map(|d| Ok(d(z) / (self.f)(z)))
    }
}

/// `Z_N` evaluated by direct summation.
pub struct PartitionHandle<'a> {
    pub batch: &'a SampleBatch,
    pub n: f64,
}

impl AnalyticHandle for PartitionHandle<'_> {
    fn eval(&self, z: Complex64) -> Result<LogValue> {
        let v = crate::partition::eval_point(self.batch, self.n, ComplexParam::from(z))?;
        Ok(LogValue { ln_abs: v.log_modulus, arg: v.phase })
    }

    fn log_derivative(&self, z: Complex64) -> Option<Result<Complex64>> {
        Some(eval_with_log_derivative(self.batch, self.n, z).map(|r| r.1))
    }
}

impl AnalyticHandle for LocalExpansion {
    fn eval(&self, z: Complex64) -> Result<LogValue> {
        let (v, _) = LocalExpansion::eval(self, z)?;
        Ok(LogValue { ln_abs: v.log_modulus, arg: v.phase })
    }

    fn log_derivative(&self, z: Complex64) -> Option<Result<Complex64>> {
        Some(LocalExpansion::eval(self, z).map(|r| r.1))
    }
}

/// Handle composed with an affine change of variable `z ↦ origin + scale·z`.
pub struct AffineHandle<'a, H: ?Sized> {
    pub inner: &'a H,
    pub origin: Complex64,
    pub scale: Complex64,
}

impl<H: AnalyticHandle + ?Sized> AnalyticHandle for AffineHandle<'_, H> {
    fn eval(&self, z: Complex64) -> Result<LogValue> {
        self.inner.eval(self.origin + self.scale * z)
    }

    fn log_derivative(&self, z: Complex64) -> Option<Result<Complex64>> {
        self.inner
            .log_derivative(self.origin + self.scale * z)
            .map(|r| r.map(|d| d * self.scale))
    }
}

/// Suspect-boundary threshold relative to the largest sampled modulus.
pub const BOUNDARY_FLOOR: f64 = 1e-12;
pub const MAX_EDGE_SAMPLES: usize = 1 << 20;
pub const JITTER: f64 = 1e-7;
pub const NEWTON_TOL: f64 = 1e-11;
pub const NEWTON_MAX_ITER: usize = 50;
pub const TINY_CELL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    pub count: i64,
    pub max_ln_abs: f64,
    pub min_ln_abs: f64,
    pub samples: usize,
}

/// Phase increments along one edge, refined until every step is below π/2.
fn edge_phase(h: &dyn AnalyticHandle, a: Complex64, b: Complex64, init: usize) -> Result<(f64, f64, f64, usize)> {
    let pt = |s: f64| a + (b - a) * s;
    let mut stack: Vec<(f64, LogValue, f64, LogValue)> = Vec::new();
    let mut nodes = Vec::with_capacity(init + 1);
    for i in 0..=init {
        let s = i as f64 / init as f64;
        nodes.push((s, h.eval(pt(s))?));
    }
    let mut total = 0.0;
    let mut max_l = f64::NEG_INFINITY;
    let mut min_l = f64::INFINITY;
    let mut samples = nodes.len();
    for (_, v) in &nodes {
        max_l = max_l.max(v.ln_abs);
        min_l = min_l.min(v.ln_abs);
    }
    for w in nodes.windows(2).rev() {
        stack.push((w[0].0, w[0].1, w[1].0, w[1].1));
    }
    while let Some((s0, v0, s1, v1)) = stack.pop() {
        if v0.ln_abs == f64::NEG_INFINITY || v1.ln_abs == f64::NEG_INFINITY {
            return Err(Error::BoundaryZero(0.0));
        }
        let d = wrap_pi(v1.arg - v0.arg);
        if d.abs() < FRAC_PI_2 {
            total += d;
            continue;
        }
        if samples >= MAX_EDGE_SAMPLES {
            return Err(Error::MaxDepth { count: -1 });
        }
        let sm = 0.5 * (s0 + s1);
        let vm = h.eval(pt(sm))?;
        samples += 1;
        max_l = max_l.max(vm.ln_abs);
        min_l = min_l.min(vm.ln_abs);
        stack.push((sm, vm, s1, v1));
        stack.push((s0, v0, sm, vm));
    }
    Ok((total, max_l, min_l, samples))
}

/// Winding number of `h` around `rect` with boundary diagnostics.
pub fn winding(h: &dyn AnalyticHandle, rect: Rect) -> Result<Winding> {
    if !rect.is_valid() {
        return Err(Error::InvalidParameter(format!("invalid rectangle {rect:?}")));
    }
    let c = [
        Complex64::new(rect.re0, rect.im0),
        Complex64::new(rect.re1, rect.im0),
        Complex64::new(rect.re1, rect.im1),
        Complex64::new(rect.re0, rect.im1),
    ];
    let mut total = 0.0;
    let mut max_l = f64::NEG_INFINITY;
    let mut min_l = f64::INFINITY;
    let mut samples = 0;
    for i in 0..4 {
        let (t, mx, mn, s) = edge_phase(h, c[i], c[(i + 1) % 4], 16)?;
        // judged per edge: across a large cell |h| may legitimately span many decades
        if mn - mx < BOUNDARY_FLOOR.ln() {
            return Err(Error::BoundaryZero((mn - mx).exp()));
        }
        total += t;
        max_l = max_l.max(mx);
        min_l = min_l.min(mn);
        samples += s;
    }
    let k = total / (2.0 * PI);
    Ok(Winding { count: k.round() as i64, max_ln_abs: max_l, min_ln_abs: min_l, samples })
}

/// Number of zeros in `rect`, counted with multiplicity.
pub fn count_zeros_winding(h: &dyn AnalyticHandle, rect: Rect) -> Result<i64> {
    Ok(winding(h, rect)?.count)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocateOptions {
    pub target_cell_zeros: i64,
    pub max_depth: usize,
    /// Absolute cell diameter below which a multi-zero cell is reported as one multiple zero.
    pub tiny_cell: f64,
}

impl Default for LocateOptions {
    fn default() -> Self {
        LocateOptions { target_cell_zeros: 1, max_depth: 60, tiny_cell: TINY_CELL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub zeros: Vec<Complex64>,
    pub multiplicities: Vec<u32>,
    /// `|h(z*)|` relative to the largest boundary modulus of the zero's cell.
    pub residuals: Vec<f64>,
    /// Leaf cells with their certified winding counts.
    pub cells: Vec<(Rect, i64)>,
    /// The rectangle actually certified (after any jitter).
    pub region: Rect,
    pub total: i64,
    pub frame: Option<String>,
}

impl ZeroSet {
    pub fn empty(region: Rect) -> Self {
        ZeroSet {
            zeros: vec![],
            multiplicities: vec![],
            residuals: vec![],
            cells: vec![],
            region,
            total: 0,
            frame: None,
        }
    }

    pub fn count(&self) -> u64 {
        self.multiplicities.iter().map(|&m| m as u64).sum()
    }

    /// Zero count (with multiplicity) inside a disk.
    pub fn count_in_disk(&self, center: Complex64, radius: f64) -> u64 {
        self.zeros
            .iter()
            .zip(&self.multiplicities)
            .filter(|(z, _)| (**z - center).norm() < radius)
            .map(|(_, &m)| m as u64)
            .sum()
    }

    pub fn count_in_rect(&self, r: &Rect) -> u64 {
        self.zeros
            .iter()
            .zip(&self.multiplicities)
            .filter(|(z, _)| r.contains(**z))
            .map(|(_, &m)| m as u64)
            .sum()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "re,im,multiplicity,residual")?;
        for ((z, m), r) in self.zeros.iter().zip(&self.multiplicities).zip(&self.residuals) {
            writeln!(w, "{},{},{m},{r}", z.re, z.im)?;
        }
        Ok(())
    }
}

fn newton(h: &dyn AnalyticHandle, start: Complex64, cell: &Rect, mult: f64) -> Option<Complex64> {
    let diam = cell.diameter();
    let guard = cell.expand(0.25 * diam);
    let mut z = start;
    for _ in 0..NEWTON_MAX_ITER {
        let ld = match h.log_derivative(z) {
            Some(Ok(v)) => v,
            Some(Err(_)) => return None,
            None => numeric_log_derivative(h, z, diam)?,
        };
        if !(ld.norm() > 0.0) || !ld.is_finite() {
            return None;
        }
        let step = mult / ld;
        z -= step;
        if !guard.contains(z) {
            return None;
        }
        if step.norm() < NEWTON_TOL * diam {
            return Some(z);
        }
    }
    None
}

/// Central-difference `h′/h` with one Richardson step.
fn numeric_log_derivative(h: &dyn AnalyticHandle, z: Complex64, scale: f64) -> Option<Complex64> {
    let v0 = h.eval(z).ok()?;
    let ratio = |d: Complex64| -> Option<Complex64> {
        let v = h.eval(z + d).ok()?;
        Some(Complex64::new(v.ln_abs - v0.ln_abs, v.arg - v0.arg).exp())
    };
    let est = |e: f64| -> Option<Complex64> {
        let d = Complex64::new(e, 0.0);
        Some((ratio(d)? - ratio(-d)?) / (2.0 * e))
    };
    let e = 1e-4 * scale.max(1e-12);
    let a = est(e)?;
    let b = est(0.5 * e)?;
    Some((4.0 * b - a) / 3.0)
}

struct Found {
    zeros: Vec<(Complex64, u32, f64)>,
    cells: Vec<(Rect, i64)>,
}

fn split(rect: &Rect, attempt: usize) -> [Rect; 4] {
    // off-centre split lines on retries, in case a zero sits on the midlines
    let xm = rect.re0 + (0.5 + 0.0137 * attempt as f64) * rect.width();
    let ym = rect.im0 + (0.5 - 0.0113 * attempt as f64) * rect.height();
    [
        Rect::new(rect.re0, xm, rect.im0, ym),
        Rect::new(xm, rect.re1, rect.im0, ym),
        Rect::new(rect.re0, xm, ym, rect.im1),
        Rect::new(xm, rect.re1, ym, rect.im1),
    ]
}

fn refine(h: &dyn AnalyticHandle, rect: Rect, w: Winding, depth: usize, opts: &LocateOptions) -> Result<Found> {
    if w.count == 0 {
        return Ok(Found { zeros: vec![], cells: vec![] });
    }
    let diam = rect.diameter();
    if w.count <= opts.target_cell_zeros {
        if let Some(z) = newton(h, rect.center(), &rect, w.count as f64) {
            if rect.contains(z) {
                let res = (h.eval(z)?.ln_abs - w.max_ln_abs).exp();
                return Ok(Found { zeros: vec![(z, w.count as u32, res)], cells: vec![(rect, w.count)] });
            }
        }
    }
    if diam < opts.tiny_cell {
        let z = rect.center();
        let res = (h.eval(z)?.ln_abs - w.max_ln_abs).exp();
        return Ok(Found { zeros: vec![(z, w.count as u32, res)], cells: vec![(rect, w.count)] });
    }
    if depth >= opts.max_depth {
        return Err(Error::MaxDepth { count: w.count });
    }
    for attempt in 0..8 {
        let kids = split(&rect, attempt);
        let ws: Vec<Result<Winding>> = kids.par_iter().map(|k| winding(h, *k)).collect();
        if ws.iter().any(|r| matches!(r, Err(Error::BoundaryZero(_)))) {
            continue;
        }
        let ws: Vec<Winding> = ws.into_iter().collect::<Result<_>>()?;
        if ws.iter().map(|k| k.count).sum::<i64>() != w.count || ws.iter().any(|k| k.count < 0) {
            continue;
        }
        let parts: Vec<Result<Found>> = kids
            .par_iter()
            .zip(ws.par_iter())
            .map(|(k, kw)| refine(h, *k, *kw, depth + 1, opts))
            .collect();
        let mut out = Found { zeros: vec![], cells: vec![] };
        for p in parts {
            let p = p?;
            out.zeros.extend(p.zeros);
            out.cells.extend(p.cells);
        }
        return Ok(out);
    }
    Err(Error::MaxDepth { count: w.count })
}

/// Finds all zeros in `rect`. If the boundary passes too close to a zero,
/// the rectangle is shifted by a small deterministic jitter first.
pub fn locate_zeros(h: &dyn AnalyticHandle, rect: Rect, opts: &LocateOptions) -> Result<ZeroSet> {
    let mut region = rect;
    let mut w = None;
    for attempt in 0..5 {
        region = rect.translate(Complex64::new(1.0, 1.0) * (JITTER * attempt as f64));
        match winding(h, region) {
            Ok(v) => {
                w = Some(v);
                break;
            }
            Err(Error::BoundaryZero(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let w = w.ok_or(Error::BoundaryZero(0.0))?;
    if w.count < 0 {
        return Err(Error::InvalidParameter("negative winding: handle has poles in the region".into()));
    }
    let found = refine(h, region, w, 0, opts)?;
    let mut zs = ZeroSet::empty(region);
    zs.total = w.count;
    // a multiple zero on a split line is seen once from each side
    let merge = 1e-8 * region.diameter();
    for (z, m, r) in found.zeros {
        if let Some(i) = zs.zeros.iter().position(|q| (q - z).norm() < merge) {
            zs.multiplicities[i] += m;
            zs.residuals[i] = zs.residuals[i].max(r);
            continue;
        }
        zs.zeros.push(z);
        zs.multiplicities.push(m);
        zs.residuals.push(r);
    }
    zs.cells = found.cells;
    if zs.count() as i64 != zs.total {
        return Err(Error::MaxDepth { count: zs.total - zs.count() as i64 });
    }
    Ok(zs)
}

/// `(1/n) Σ f(z)` over the zeros, with multiplicity.
pub fn empirical_zero_measure(zs: &ZeroSet, f: &dyn TestFunction, n: f64) -> Result<f64> {
    let supp = f.support();
    if !zs.region.contains_rect(&supp) {
        return Err(Error::ExcludedRegion(format!(
            "test-function support {supp:?} escapes certified region {:?}",
            zs.region
        )));
    }
    let s: f64 = zs.zeros.iter().zip(&zs.multiplicities).map(|(z, &m)| f.value(*z) * m as f64).sum();
    Ok(s / n)
}

/// Consecutive gaps of the zeros projected on `direction`.
pub fn spacing_stats(zs: &ZeroSet, direction: Complex64) -> Result<Vec<f64>> {
    spacings_of(&zs.zeros, direction)
}

pub fn spacings_of(zeros: &[Complex64], direction: Complex64) -> Result<Vec<f64>> {
    if zeros.len() < 3 {
        return Err(Error::InsufficientData(format!("{} zeros, need 3", zeros.len())));
    }
    let u = direction / direction.norm();
    let mut p: Vec<f64> = zeros.iter().map(|z| (z * u.conj()).re).collect();
    p.sort_by(f64::total_cmp);
    Ok(p.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Distance from each zero to its nearest neighbour.
pub fn nearest_neighbor_distances(zeros: &[Complex64]) -> Vec<f64> {
    zeros
        .iter()
        .enumerate()
        .map(|(i, z)| {
            zeros
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, w)| (z - w).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Zeros of `Z_N` in a rectangle, through a [`LocalExpansion`] on the
/// circumscribed disk.
pub fn partition_zeros(batch: &SampleBatch, n: f64, rect: Rect) -> Result<ZeroSet> {
    let pad = rect.expand(4.0 * JITTER);
    let radius = 0.5 * pad.diameter() * (1.0 + 1e-6);
    let exp = LocalExpansion::new(batch, n, pad.center(), radius)?;
    locate_zeros(&exp, rect, &LocateOptions::default())
}

/// Zeros of `Z_N` in the disk of radius `window/√n` about `β₀`, returned in
/// the rescaled coordinate `√n(β − β₀)`.
pub fn local_zero_process(
    batch: &SampleBatch,
    n: f64,
    beta0: ComplexParam,
    window: f64,
    check_margin: bool,
) -> Result<ZeroSet> {
    if !(window >= 0.0) {
        return Err(Error::InvalidParameter("window radius must be nonnegative".into()));
    }
    let s = n.sqrt();
    let r = window / s;
    let label = crate::phase::classify(beta0);
    if label != crate::phase::PhaseLabel::B3 {
        return Err(Error::FrameMismatch(format!("{beta0} is not inside B3")));
    }
    if check_margin && distance_to_boundaries(beta0) <= r {
        return Err(Error::ExcludedRegion(format!(
            "window of radius {r:.4} around {beta0} reaches a phase boundary"
        )));
    }
    let b0 = beta0.to_complex();
    let square = Rect::new(-window, window, -window, window).expand(1e-3 * window.max(1e-9));
    if window == 0.0 {
        return Ok(ZeroSet { frame: Some("sqrt_n_B3".into()), ..ZeroSet::empty(square) });
    }
    let exp = LocalExpansion::new(batch, n, b0, (square.diameter() * 0.5 + 4.0 * JITTER) / s)?;
    let h = AffineHandle { inner: &exp, origin: b0, scale: Complex64::new(1.0 / s, 0.0) };
    let mut zs = locate_zeros(&h, square, &LocateOptions::default())?;
    let keep: Vec<usize> = (0..zs.zeros.len()).filter(|&i| zs.zeros[i].norm() < window).collect();
    zs.zeros = keep.iter().map(|&i| zs.zeros[i]).collect();
    zs.multiplicities = keep.iter().map(|&i| zs.multiplicities[i]).collect();
    zs.residuals = keep.iter().map(|&i| zs.residuals[i]).collect();
    zs.frame = Some("sqrt_n_B3".into());
    Ok(zs)
}

/// Whether a rectangle lies in `{|σ| > 1/√2, |σ| + |τ| > √2}` on one side.
fn b2_side(r: &Rect) -> Option<i8> {
    let tau_min = if r.im0 <= 0.0 && r.im1 >= 0.0 { 0.0 } else { r.im0.abs().min(r.im1.abs()) };
    if r.re0 > FRAC_1_SQRT_2 && r.re0 + tau_min > SQRT_2 {
        Some(1)
    } else if r.re1 < -FRAC_1_SQRT_2 && -r.re1 + tau_min > SQRT_2 {
        Some(-1)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaZeroComparison {
    pub partition_counts: Vec<u64>,
    pub zeta_counts: Vec<u64>,
    pub ks: crate::stats::KsResult,
    pub partition_mean: f64,
    pub zeta_mean: f64,
}

/// Zero counts of `Z_N` (one batch per replica) against zero counts of
/// `ζ_P(β/√2)` for independent Poisson samples, over the same region.
pub fn zetap_zero_compare(
    batches: &[SampleBatch],
    n: f64,
    region: Rect,
    zeta_samples: &[ZetaPSample],
) -> Result<ZetaZeroComparison> {
    let side = b2_side(&region).ok_or_else(|| {
        Error::ExcludedRegion(
            "region must lie in |sigma| > 1/sqrt2, |sigma|+|tau| > sqrt2; Z_N has no zeros to match in the triangle".into(),
        )
    })?;
    let partition_counts: Vec<u64> = batches
        .iter()
        .map(|b| partition_zeros(b, n, region).map(|z| z.count()))
        .collect::<Result<_>>()?;
    // the mirrored half uses β ↦ −β, i.e. ζ_P(−β/√2) of an independent copy
    let sgn = side as f64;
    let zr = Rect::new(
        (sgn * region.re0).min(sgn * region.re1) / SQRT_2,
        (sgn * region.re0).max(sgn * region.re1) / SQRT_2,
        (sgn * region.im0).min(sgn * region.im1) / SQRT_2,
        (sgn * region.im0).max(sgn * region.im1) / SQRT_2,
    );
    let zeta_counts: Vec<u64> = zeta_samples
        .iter()
        .map(|s| locate_zeros(&ZetaHandle { sample: s, tilde: false }, zr, &LocateOptions::default()).map(|z| z.count()))
        .collect::<Result<_>>()?;
    let a: Vec<f64> = partition_counts.iter().map(|&c| c as f64).collect();
    let b: Vec<f64> = zeta_counts.iter().map(|&c| c as f64).collect();
    Ok(ZetaZeroComparison {
        ks: crate::stats::ks_two_sample(&a, &b),
        partition_mean: crate::stats::mean(&a),
        zeta_mean: crate::stats::mean(&b),
        partition_counts,
        zeta_counts,
    })
}
