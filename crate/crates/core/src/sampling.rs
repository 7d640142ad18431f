//! Reproducible random sources.
//!
//! Every draw comes from a ChaCha8 generator keyed by a `(seed, stream)` pair.
//! Streams are derived from a replica index and a purpose tag, so parallel
//! replicas never share generator state and results do not depend on the
//! scheduling order. Normals use the ziggurat sampler from `rand_distr`
//! (pinned through `Cargo.lock`).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::compute_bn;
use crate::phase::RemConfig;

/// What a stream is used for. Part of the stream index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Purpose {
    Energies = 1,
    Arrivals = 2,
    Stable = 3,
    GafCoefficients = 4,
    TailCompletion = 5,
    Auxiliary = 6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedPath {
    pub seed: u64,
    pub stream: u64,
}

impl SeedPath {
    pub fn new(seed: u64, stream: u64) -> Self {
        SeedPath { seed, stream }
    }

    pub fn for_replica(seed: u64, replica: u64, purpose: Purpose) -> Self {
        SeedPath { seed, stream: stream_index(replica, purpose) }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

pub fn stream_index(replica: u64, purpose: Purpose) -> u64 {
    (replica << 8) | purpose as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub rho: f64,
    pub seed_path: SeedPath,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Builds a batch from explicit arrays (tests, replays).
    pub fn from_arrays(x: Vec<f64>, y: Vec<f64>, rho: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidParameter("x and y lengths differ".into()));
        }
        Ok(SampleBatch { x, y, rho, seed_path: SeedPath::new(0, 0) })
    }
}

/// `N = cfg.big_n` correlated standard normal pairs.
///
/// The whole `x` array is drawn before the independent part of `y`, so the
/// energies for a given seed path do not depend on `ρ`.
pub fn gaussian_pairs(cfg: &RemConfig, stream: u64) -> SampleBatch {
    let seed_path = SeedPath::new(cfg.seed, stream);
    let mut rng = seed_path.rng();
    let n = cfg.big_n as usize;
    let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let rho = cfg.rho;
    let y = if rho == 1.0 {
        x.clone()
    } else if rho == -1.0 {
        x.iter().map(|v| -v).collect()
    } else {
        let c = (1.0 - rho * rho).sqrt();
        x.iter()
            .map(|&xv| {
                let w: f64 = rng.sample(StandardNormal);
                rho * xv + c * w
            })
            .collect()
    };
    SampleBatch { x, y, rho, seed_path }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonArrivals {
    pub p: Vec<f64>,
    pub horizon: f64,
}

/// Unit-intensity Poisson arrival times on `(0, T]`.
pub fn poisson_arrivals(horizon: f64, seed_path: SeedPath) -> Result<PoissonArrivals> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let mut rng = seed_path.rng();
    let mut p = Vec::with_capacity(horizon as usize + 16);
    let mut t = 0.0;
    loop {
        let e: f64 = rng.sample(Exp1);
        t += e;
        if t > horizon {
            break;
        }
        p.push(t);
    }
    Ok(PoissonArrivals { p, horizon })
}

/// Totally skewed positive stable variate with Laplace transform
/// `E e^{−λS} = e^{−λ^a}`, `0 < a < 1` (Kanter / Chambers–Mallows–Stuck).
pub fn positive_stable<R: Rng + ?Sized>(alpha_half: f64, rng: &mut R) -> Result<f64> {
    if !(alpha_half > 0.0 && alpha_half < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "positive stable index must be in (0,1), got {alpha_half}"
        )));
    }
    let a = alpha_half;
    // open interval: avoid the endpoints where sin vanishes
    let u = loop {
        let v: f64 = rng.random::<f64>() * PI;
        if v > 0.0 {
            break v;
        }
    };
    let e: f64 = rng.sample(Exp1);
    let num = (a * u).sin() / u.sin().powf(1.0 / a);
    let tail = ((1.0 - a) * u).sin() / e;
    Ok(num * tail.powf((1.0 - a) / a))
}

/// Rotationally invariant complex α-stable variate, `√A (G₁ + iG₂)` with
/// `A` positive (α/2)-stable. Characteristic function `e^{−(|z|²/2)^{α/2}}`.
pub fn isotropic_stable_complex<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<Complex64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!("stable index must be in (0,2), got {alpha}")));
    }
    let a = positive_stable(alpha / 2.0, rng)?;
    let g1: f64 = rng.sample(StandardNormal);
    let g2: f64 = rng.sample(StandardNormal);
    Ok(a.sqrt() * Complex64::new(g1, g2))
}

/// Draws `count` isotropic stable variates from one seed path.
pub fn isotropic_stable_batch(alpha: f64, count: usize, seed_path: SeedPath) -> Result<Vec<Complex64>> {
    let mut rng = seed_path.rng();
    (0..count).map(|_| isotropic_stable_complex(alpha, &mut rng)).collect()
}

/// Top `k` energies rescaled as `√n (X − b_N)`, largest first.
pub fn extremal_rescaled_points(batch: &SampleBatch, n: f64, k: usize) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::InvalidParameter("empty batch".into()));
    }
    if k > batch.len() {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds batch size {}", batch.len())));
    }
    let mut v = batch.x.clone();
    if k < v.len() {
        v.select_nth_unstable_by(k, |a, b| b.total_cmp(a));
        v.truncate(k);
    }
    v.sort_by(|a, b| b.total_cmp(a));
    let bn = compute_bn(n);
    let s = n.sqrt();
    Ok(v.into_iter().map(|x| s * (x - bn)).collect())
}
