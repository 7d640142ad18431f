//! Fluctuation harness: normalizing sequences `(m_N, v_N)` for each
//! parameter regime, replica ensembles of `(Z_N − m_N)/v_N`, and tests of
//! the ensembles against their limit laws.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::ZetaPSample;
use crate::error::{Error, Result};
use crate::partition::{compute_bn, eval_point};
use crate::phase::{ComplexParam, RemConfig};
use crate::sampling::{gaussian_pairs, isotropic_stable_batch, stream_index, Purpose, SeedPath};
use crate::specfun::{ln_truncated_exp_moment_bivariate, phi_real, Cutoff};
use crate::stats::{
    chi_square_uniform, ecf_alpha_regression, ks_one_sample, ks_two_sample, mean, median, KsResult,
};

const EDGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    C1a,
    C1b,
    C1crit,
    C2a,
    C2b,
    C2c,
}

impl CaseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::C1a => "C1a",
            CaseTag::C1b => "C1b",
            CaseTag::C1crit => "C1crit",
            CaseTag::C2a => "C2a",
            CaseTag::C2b => "C2b",
            CaseTag::C2c => "C2c",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitLaw {
    ComplexGaussian { variance: f64 },
    RealGaussian { variance: f64 },
    IsotropicStable { alpha: f64 },
    ZetaP { argument: Complex64, tilde: bool, conjugate: bool },
    OutOfScopeRealCase,
}

/// Which centering a large-σ plan uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// Leading power of `N` (or zero).
    Asymptotic,
    /// Exact truncated expectation `N·E[e^{√n(σX+iτY)} 1_{X<b_N}]`.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationPlan {
    pub beta: ComplexParam,
    pub rho: f64,
    pub n: f64,
    /// `log m_N`; `None` when `m_N = 0`.
    pub ln_m: Option<Complex64>,
    pub ln_v: Complex64,
    pub limit: LimitLaw,
    pub case_tag: CaseTag,
    pub centering: Centering,
    /// Set when the plan was built for `−β` (left half-plane).
    pub mirrored: bool,
}

impl NormalizationPlan {
    pub fn m_n(&self) -> Complex64 {
        self.ln_m.map_or(Complex64::new(0.0, 0.0), |l| l.exp())
    }

    pub fn v_n(&self) -> Complex64 {
        self.ln_v.exp()
    }

    /// `(Z − m_N)/v_N` from `log Z`.
    pub fn normalize(&self, ln_z: Option<Complex64>) -> Complex64 {
        let z = ln_z.map_or(Complex64::new(0.0, 0.0), |l| (l - self.ln_v).exp());
        let m = self.ln_m.map_or(Complex64::new(0.0, 0.0), |l| (l - self.ln_v).exp());
        z - m
    }
}

/// `log N^{1 + (σ²−τ²)/2 + iστρ}`, the log of `E Z_N`.
fn ln_mean(beta: ComplexParam, rho: f64, n: f64) -> Complex64 {
    let (s, t) = (beta.sigma, beta.tau);
    n * Complex64::new(1.0 + 0.5 * (s * s - t * t), s * t * rho)
}

/// `log(N·E[e^{√n(σX+iτY)} 1_{X<b_N}])`.
pub fn ln_truncated_center(beta: ComplexParam, rho: f64, n: f64) -> Complex64 {
    let bn = compute_bn(n);
    n + ln_truncated_exp_moment_bivariate(n.sqrt(), beta.sigma, beta.tau, rho, Cutoff::Finite(bn))
}

pub fn truncated_center(beta: ComplexParam, rho: f64, n: f64) -> Complex64 {
    ln_truncated_center(beta, rho, n).exp()
}

/// Case tag of `(β, ρ)`; `σ < 0` is reflected first.
pub fn case_tag(beta: ComplexParam) -> CaseTag {
    let s = beta.sigma.abs();
    let t = beta.tau.abs();
    let s2 = s * s;
    if (s2 - 0.5).abs() <= EDGE_TOL {
        CaseTag::C1crit
    } else if s2 < 0.5 {
        if s2 + t * t < 1.0 { CaseTag::C1a } else { CaseTag::C1b }
    } else {
        let d = s + t - SQRT_2;
        if d.abs() <= EDGE_TOL {
            CaseTag::C2c
        } else if d > 0.0 {
            CaseTag::C2a
        } else {
            CaseTag::C2b
        }
    }
}

pub fn make_plan(beta: ComplexParam, rho: f64, n: f64) -> Result<NormalizationPlan> {
    make_plan_with(beta, rho, n, Centering::Truncated)
}

pub fn make_plan_with(beta: ComplexParam, rho: f64, n: f64, centering: Centering) -> Result<NormalizationPlan> {
    if !beta.is_finite() || !(n > 0.0) || !(rho.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("bad plan inputs beta={beta}, rho={rho}, n={n}")));
    }
    let mirrored = beta.sigma < 0.0;
    // Z_N(β) and Z_N(−β) agree in law
    let b = if mirrored { ComplexParam::new(-beta.sigma, -beta.tau) } else { beta };
    let tag = case_tag(b);
    let (s, t) = (b.sigma, b.tau);
    let real_case = t == 0.0;
    let mut plan = NormalizationPlan {
        beta,
        rho,
        n,
        ln_m: Some(ln_mean(b, rho, n)),
        ln_v: Complex64::new(0.0, 0.0),
        limit: LimitLaw::OutOfScopeRealCase,
        case_tag: tag,
        centering,
        mirrored,
    };
    match tag {
        CaseTag::C1a | CaseTag::C1b => {
            plan.ln_v = Complex64::new(n * (0.5 + s * s), 0.0);
            plan.limit = if real_case {
                LimitLaw::OutOfScopeRealCase
            } else {
                LimitLaw::ComplexGaussian { variance: 1.0 }
            };
        }
        CaseTag::C1crit => {
            plan.ln_v = Complex64::new(n, 0.0);
            plan.limit = if real_case {
                LimitLaw::OutOfScopeRealCase
            } else {
                LimitLaw::ComplexGaussian { variance: 0.5 }
            };
        }
        CaseTag::C2a | CaseTag::C2b | CaseTag::C2c => {
            let analytic = rho.abs() == 1.0;
            if analytic && rho > 0.0 && (s - SQRT_2).abs() <= EDGE_TOL && s + t.abs() <= SQRT_2 + EDGE_TOL {
                return Err(Error::ExcludedRegion("sigma = sqrt2 with rho = 1 on the closed B1 side".into()));
            }
            let scale = n.sqrt() * compute_bn(n);
            // for ρ = −1 the model at β is the ρ = 1 model at β̄
            let eff = if rho < 0.0 { b.conj() } else { b };
            plan.ln_v = if analytic { eff.to_complex() * scale } else { Complex64::new(s * scale, 0.0) };
            plan.ln_m = match centering {
                Centering::Truncated => Some(ln_truncated_center(b, rho, n)),
                Centering::Asymptotic if tag == CaseTag::C2a => None,
                Centering::Asymptotic => Some(ln_mean(b, rho, n)),
            };
            plan.limit = if real_case {
                LimitLaw::OutOfScopeRealCase
            } else if analytic {
                LimitLaw::ZetaP {
                    argument: eff.to_complex() / SQRT_2,
                    tilde: centering == Centering::Truncated,
                    conjugate: rho < 0.0,
                }
            } else {
                LimitLaw::IsotropicStable { alpha: SQRT_2 / s }
            };
        }
    }
    Ok(plan)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaEnsemble {
    pub samples: Vec<Complex64>,
    pub config: RemConfig,
    pub plan: NormalizationPlan,
}

impl ReplicaEnsemble {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "re,im")?;
        for s in &self.samples {
            writeln!(w, "{},{}", s.re, s.im)?;
        }
        Ok(())
    }
}

/// One normalized sample per replica; replica `r` uses energy stream `r`.
pub fn run_ensemble(plan: &NormalizationPlan, cfg: &RemConfig, replicas: usize) -> Result<ReplicaEnsemble> {
    if replicas == 0 {
        return Err(Error::InvalidParameter("replicas must be >= 1".into()));
    }
    if (cfg.n - plan.n).abs() > 1e-12 || cfg.rho != plan.rho {
        return Err(Error::FrameMismatch("plan and config disagree on n or rho".into()));
    }
    let samples = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let batch = gaussian_pairs(cfg, stream_index(r, Purpose::Energies));
            let z = eval_point(&batch, cfg.n, plan.beta)?;
            Ok(plan.normalize(if z.is_zero() { None } else { Some(z.ln()) }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicaEnsemble { samples, config: *cfg, plan: *plan })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, statistic: f64, threshold: f64, passed: bool) -> Self {
        Check { name: name.into(), statistic, threshold, passed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianReport {
    pub variance: f64,
    pub second_moment: f64,
    /// `median|S|² / ln 2`, insensitive to rare large replicas.
    pub robust_second_moment: f64,
    pub pseudo_moment: Complex64,
    pub ks_re: KsResult,
    pub ks_im: KsResult,
    pub corr_re_im: f64,
    /// Whether the gate used the robust second moment.
    pub robust_gate: bool,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Gaussian-limit checks with the variance taken from the plan.
pub fn test_gaussian_limit(ens: &ReplicaEnsemble) -> Result<GaussianReport> {
    let v = match ens.plan.limit {
        LimitLaw::ComplexGaussian { variance } => variance,
        _ => return Err(Error::FrameMismatch("plan limit is not complex Gaussian".into())),
    };
    // at σ² = ½ the untruncated second moment does not converge to the limit variance
    gaussian_checks(&ens.samples, v, ens.plan.case_tag == CaseTag::C1crit)
}

/// The checks of [`test_gaussian_limit`] for an arbitrary target variance.
pub fn gaussian_checks(samples: &[Complex64], v: f64, robust_gate: bool) -> Result<GaussianReport> {
    if samples.len() < 100 {
        return Err(Error::InsufficientData(format!("{} replicas, need >= 100", samples.len())));
    }
    let abs2: Vec<f64> = samples.iter().map(|s| s.norm_sqr()).collect();
    let second_moment = mean(&abs2);
    let robust_second_moment = median(&abs2) / std::f64::consts::LN_2;
    let pseudo_moment = samples.iter().map(|s| s * s).sum::<Complex64>() / samples.len() as f64;
    let re: Vec<f64> = samples.iter().map(|s| s.re).collect();
    let im: Vec<f64> = samples.iter().map(|s| s.im).collect();
    let sd = (v / 2.0).sqrt();
    let cdf = |x: f64| phi_real(x / sd);
    let ks_re = ks_one_sample(&re, cdf);
    let ks_im = ks_one_sample(&im, cdf);
    let corr_re_im = crate::stats::correlation(&re, &im);
    let m2 = if robust_gate { robust_second_moment } else { second_moment };
    let checks = vec![
        Check::new("second_moment", m2, 0.1, (m2 - v).abs() <= 0.1),
        Check::new("pseudo_moment", pseudo_moment.norm(), 0.1, pseudo_moment.norm() < 0.1),
        Check::new("ks_re", ks_re.p_value, 0.01, ks_re.p_value > 0.01),
        Check::new("ks_im", ks_im.p_value, 0.01, ks_im.p_value > 0.01),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(GaussianReport {
        variance: v,
        second_moment,
        robust_second_moment,
        pseudo_moment,
        ks_re,
        ks_im,
        corr_re_im,
        robust_gate,
        checks,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableReport {
    pub alpha: f64,
    pub alpha_hat: f64,
    pub alpha_se: f64,
    pub isotropy_p: f64,
    /// Modulus comparison with sampler draws after median matching (informational).
    pub ks_modulus: KsResult,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub const ISOTROPY_BINS: usize = 16;

/// Isotropy and exponent checks; `alpha_tol` is the allowed `|α̂ − α|`.
pub fn stable_checks(samples: &[Complex64], alpha: f64, alpha_tol: f64, seed: u64) -> Result<StableReport> {
    if samples.len() < 100 {
        return Err(Error::InsufficientData(format!("{} replicas, need >= 100", samples.len())));
    }
    let mut bins = vec![0u64; ISOTROPY_BINS];
    for s in samples {
        let a = (s.arg() + PI) / (2.0 * PI);
        bins[((a * ISOTROPY_BINS as f64) as usize).min(ISOTROPY_BINS - 1)] += 1;
    }
    let iso = chi_square_uniform(&bins)?;
    let fit = ecf_alpha_regression(samples)?;
    let draws = isotropic_stable_batch(alpha, samples.len(), SeedPath::for_replica(seed, 0, Purpose::Stable))?;
    let ma: Vec<f64> = samples.iter().map(|s| s.norm()).collect();
    let mb: Vec<f64> = draws.iter().map(|s| s.norm()).collect();
    let (ca, cb) = (median(&ma), median(&mb));
    let ma: Vec<f64> = ma.iter().map(|x| x / ca).collect();
    let mb: Vec<f64> = mb.iter().map(|x| x / cb).collect();
    let ks_modulus = ks_two_sample(&ma, &mb);
    let checks = vec![
        Check::new("isotropy_chi2", iso.p_value, 0.01, iso.p_value > 0.01),
        Check::new("alpha_hat", fit.alpha, alpha_tol, (fit.alpha - alpha).abs() <= alpha_tol),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(StableReport {
        alpha,
        alpha_hat: fit.alpha,
        alpha_se: fit.std_err,
        isotropy_p: iso.p_value,
        ks_modulus,
        checks,
        passed,
    })
}

pub fn test_stable_limit(ens: &ReplicaEnsemble) -> Result<StableReport> {
    let alpha = match ens.plan.limit {
        LimitLaw::IsotropicStable { alpha } => alpha,
        _ => return Err(Error::FrameMismatch("plan limit is not isotropic stable".into())),
    };
    stable_checks(&ens.samples, alpha, 0.15, ens.config.seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaReport {
    pub argument: Complex64,
    pub tilde: bool,
    pub horizon: f64,
    pub ks_re: KsResult,
    pub ks_im: KsResult,
    pub ks_modulus: KsResult,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub const DEFAULT_ZETA_HORIZON: f64 = 1e4;

/// Draws of `ζ_P(a)` (or `ζ̃_P(a)`) with the Gaussian tail beyond the horizon.
pub fn zeta_limit_draws(argument: Complex64, tilde: bool, replicas: usize, horizon: f64, seed: u64) -> Result<Vec<Complex64>> {
    (0..replicas as u64)
        .into_par_iter()
        .map(|j| {
            let z = ZetaPSample::new(horizon, SeedPath::for_replica(seed, j, Purpose::Arrivals))?;
            let (v, _) = if tilde { z.tilde_with_derivative(argument)? } else { z.zeta_with_derivative(argument)? };
            let mut rng = SeedPath::for_replica(seed, j, Purpose::TailCompletion).rng();
            Ok(v + z.tail_draw(argument, &mut rng)?)
        })
        .collect()
}

pub fn test_zetap_limit(ens: &ReplicaEnsemble, zeta_replicas: usize, horizon: f64) -> Result<ZetaReport> {
    let (argument, tilde) = match ens.plan.limit {
        LimitLaw::ZetaP { argument, tilde, .. } => (argument, tilde),
        _ => return Err(Error::FrameMismatch("plan limit is not a Poisson zeta law".into())),
    };
    if zeta_replicas < 100 || ens.samples.len() < 100 {
        return Err(Error::InsufficientData("need >= 100 samples on each side".into()));
    }
    // independent seed family for the limit side
    let draws = zeta_limit_draws(argument, tilde, zeta_replicas, horizon, ens.config.seed ^ 0x5a5a_5a5a)?;
    let part = |v: &[Complex64], f: fn(&Complex64) -> f64| v.iter().map(f).collect::<Vec<f64>>();
    let ks_re = ks_two_sample(&part(&ens.samples, |z| z.re), &part(&draws, |z| z.re));
    let ks_im = ks_two_sample(&part(&ens.samples, |z| z.im), &part(&draws, |z| z.im));
    let ks_modulus = ks_two_sample(&part(&ens.samples, |z| z.norm()), &part(&draws, |z| z.norm()));
    let checks = vec![
        Check::new("ks_re", ks_re.p_value, 0.01, ks_re.p_value > 0.01),
        Check::new("ks_im", ks_im.p_value, 0.01, ks_im.p_value > 0.01),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(ZetaReport { argument, tilde, horizon, ks_re, ks_im, ks_modulus, checks, passed })
}

/// `1/√2` as a named threshold for readability at call sites.
pub const SIGMA_CRIT: f64 = FRAC_1_SQRT_2;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::limit_p;

    #[test]
    fn plan_examples() {
        let n = 12.0;
        let p = make_plan(ComplexParam::new(0.4, 1.2), 0.3, n).unwrap();
        assert_eq!(p.case_tag, CaseTag::C1b);
        assert!((p.ln_v.re - 0.66 * n).abs() < 1e-12);
        let m = p.ln_m.unwrap();
        assert!((m.re - 0.36 * n).abs() < 1e-12 && (m.im - 0.144 * n).abs() < 1e-12);
        assert_eq!(p.limit, LimitLaw::ComplexGaussian { variance: 1.0 });

        let p = make_plan_with(ComplexParam::new(1.2, 1.0), 0.0, n, Centering::Asymptotic).unwrap();
        assert_eq!(p.case_tag, CaseTag::C2a);
        assert!(p.ln_m.is_none());
        assert!((p.ln_v.re - 1.2 * n.sqrt() * compute_bn(n)).abs() < 1e-12);
        assert_eq!(p.limit, LimitLaw::IsotropicStable { alpha: SQRT_2 / 1.2 });

        let p = make_plan_with(ComplexParam::new(1.0, 0.2), 0.0, n, Centering::Asymptotic).unwrap();
        assert_eq!(p.case_tag, CaseTag::C2b);
        assert!((p.ln_m.unwrap().re - 1.48 * n).abs() < 1e-12);

        let p = make_plan(ComplexParam::new(SIGMA_CRIT, 1.0), 0.0, n).unwrap();
        assert_eq!(p.case_tag, CaseTag::C1crit);
        assert_eq!(p.limit, LimitLaw::ComplexGaussian { variance: 0.5 });
        assert_eq!(make_plan(ComplexParam::new(0.3, 0.0), 0.0, n).unwrap().limit, LimitLaw::OutOfScopeRealCase);
    }

    #[test]
    fn plan_mirror_and_conjugate() {
        let n = 12.0;
        let a = make_plan(ComplexParam::new(1.1, 0.9), 1.0, n).unwrap();
        let b = make_plan(ComplexParam::new(-1.1, -0.9), 1.0, n).unwrap();
        assert_eq!(a.ln_v, b.ln_v);
        assert_eq!(a.limit, b.limit);
        let c = make_plan(ComplexParam::new(1.1, -0.9), -1.0, n).unwrap();
        match c.limit {
            LimitLaw::ZetaP { argument, conjugate, .. } => {
                assert!(conjugate);
                assert!((argument - Complex64::new(1.1, 0.9) / SQRT_2).norm() < 1e-15);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn log_scale_consistency() {
        let n = 40.0;
        for &(s, t) in &[(0.3, 0.4), (0.4, 1.2), (0.6, 1.5), (1.2, 1.0), (1.0, 0.2), (-1.3, 0.5), (0.9, 0.1)] {
            let b = ComplexParam::new(s, t);
            for rho in [0.0, 0.5] {
                let p = make_plan_with(b, rho, n, Centering::Asymptotic).unwrap();
                let lm = p.ln_m.map_or(f64::NEG_INFINITY, |l| l.re);
                let dom = lm.max(p.ln_v.re) / n;
                assert!((dom - limit_p(b)).abs() < 0.1, "{b}: {dom} vs {}", limit_p(b));
            }
        }
    }

    #[test]
    fn truncated_center_asymptotics() {
        // ρ = 0 factorizes: the ratio to the full mean is Φ(b_N − σ√n)
        let b = ComplexParam::new(1.0, 0.2);
        let n = 18.0;
        let r = (ln_truncated_center(b, 0.0, n) - ln_mean(b, 0.0, n)).exp();
        let oracle = phi_real(compute_bn(n) - n.sqrt());
        assert!((r - oracle).norm() < 1e-10 * oracle, "{r} vs {oracle}");
        // C2a, ρ = 1: e^{−β√n b_N} times the center tends to √2/(β − √2)
        let b = ComplexParam::new(1.2, 1.0);
        let tc = ln_truncated_center(b, 1.0, n);
        let r = (tc - b.to_complex() * n.sqrt() * compute_bn(n)).exp();
        let target = SQRT_2 / (b.to_complex() - SQRT_2);
        assert!((r - target).norm() < 0.1 * target.norm(), "{r} vs {target}");
        // C2a, ρ = 0: center is o(v_N)
        let ratios: Vec<f64> = [10.0, 14.0, 18.0]
            .iter()
            .map(|&n| (ln_truncated_center(b, 0.0, n).re - 1.2 * n.sqrt() * compute_bn(n)).exp())
            .collect();
        assert!(ratios[0] > ratios[1] && ratios[1] > ratios[2]);
    }

    #[test]
    fn degenerate_ensemble() {
        let cfg = RemConfig::from_count(500, 0.0, 3).unwrap();
        let plan = make_plan(ComplexParam::new(0.0, 0.0), 0.0, cfg.n).unwrap();
        let e = run_ensemble(&plan, &cfg, 3).unwrap();
        let expect = plan.normalize(Some(Complex64::new(500f64.ln(), 0.0)));
        assert!(e.samples.iter().all(|s| (s - expect).norm() < 1e-12));
        let again = run_ensemble(&plan, &cfg, 3).unwrap();
        assert_eq!(e, again);
    }

    #[test]
    fn conjugate_ensemble_for_rho_one() {
        let cfg = RemConfig::from_count(2000, 1.0, 4).unwrap();
        let p = make_plan(ComplexParam::new(0.4, 1.2), 1.0, cfg.n).unwrap();
        let q = make_plan(ComplexParam::new(0.4, -1.2), 1.0, cfg.n).unwrap();
        let a = run_ensemble(&p, &cfg, 4).unwrap();
        let b = run_ensemble(&q, &cfg, 4).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x - y.conj()).norm() < 1e-12 * x.norm().max(1.0));
        }
    }

    #[test]
    fn sampler_self_test_recovers_alpha() {
        let draws = isotropic_stable_batch(1.3, 20_000, SeedPath::new(77, 1)).unwrap();
        let r = stable_checks(&draws, 1.3, 0.05, 5).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
