//! Command-line front end. Every command writes its data files plus a
//! `manifest.json` recording the arguments and SHA-256 digests of the outputs;
//! `crem rerun <manifest>` repeats the run and checks the digests.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::{gaf_zero_stats, zetap_choose_horizon, ZetaPSample};
use crate::error::{Error, Result};
use crate::fluct::{
    make_plan_with, run_ensemble, test_gaussian_limit, test_stable_limit, test_zetap_limit, Centering, LimitLaw,
    DEFAULT_ZETA_HORIZON,
};
use crate::phase::{classify, limit_p, ComplexParam, PhaseLabel, Rect, RemConfig};
use crate::sampling::{gaussian_pairs, stream_index, Purpose, SeedPath};
use crate::zeros::partition_zeros;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_GATE_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "crem", version, about = "Complex random energy model experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct ModelArgs {
    /// `n = log N`.
    #[arg(long, default_value_t = 10.0)]
    pub n: f64,
    /// Number of energies; overrides `--n`.
    #[arg(long = "N")]
    pub big_n: Option<u64>,
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Allow `n` beyond the double-precision budget.
    #[arg(long)]
    pub allow_large_n: bool,
}

impl ModelArgs {
    pub fn config(&self) -> Result<RemConfig> {
        match self.big_n {
            Some(big_n) => RemConfig::from_count(big_n, self.rho, self.seed),
            None if self.allow_large_n => RemConfig::from_n_override(self.n, self.rho, self.seed),
            None => RemConfig::from_n(self.n, self.rho, self.seed),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phase labels and `p(β)` on a grid.
    Phase {
        #[arg(long, default_value = "-2:2:-2:2", value_parser = parse_window)]
        window: Rect,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
    },
    /// Zeros of `Z_N` in a window, one file per replica.
    Zeros {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_window)]
        window: Rect,
        #[arg(long, default_value_t = 10)]
        replicas: usize,
        /// Histogram cell size.
        #[arg(long, default_value_t = 0.05)]
        grid_step: f64,
    },
    /// Fluctuation ensemble and its limit-law test.
    Fluct {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_beta)]
        beta: Complex64,
        #[arg(long, default_value_t = 1000)]
        replicas: usize,
        /// Use the leading-order centering instead of the truncated expectation.
        #[arg(long)]
        asymptotic_centering: bool,
    },
    /// Samples of the Poisson zeta function at one point.
    Zeta {
        #[arg(long, value_parser = parse_beta)]
        beta: Complex64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        replicas: usize,
        /// Arrival horizon; chosen from `--tol` when absent.
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
    },
    /// Zero counts of the plane Gaussian analytic function in a disk.
    Gaf {
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        #[arg(long, value_parser = parse_beta, default_value = "0,0")]
        center: Complex64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        replicas: usize,
    },
    /// Repeat a run from its manifest and verify the output digests.
    Rerun { manifest: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, sufficient to repeat the run.
    pub args: Vec<String>,
    pub config: Option<RemConfig>,
    pub parameters: serde_json::Value,
    pub tool_version: String,
    pub started: String,
    pub finished: String,
    pub seed_path: Option<SeedPath>,
    pub outputs: Vec<OutputDigest>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Parses `a+bi`, `a-bi`, `a`, `bi` or `a,b`.
pub fn parse_beta(s: &str) -> std::result::Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex value '{s}'");
    if let Some((a, b)) = t.split_once(',') {
        let re = a.parse::<f64>().map_err(|_| bad())?;
        let im = b.parse::<f64>().map_err(|_| bad())?;
        return Ok(Complex64::new(re, im));
    }
    if let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) {
        // split at the last sign that is not an exponent sign or the leading one
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(k) => (body[..k].parse::<f64>().map_err(|_| bad())?, &body[k..]),
            None => (0.0, body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            v => v.parse::<f64>().map_err(|_| bad())?,
        };
        return Ok(Complex64::new(re, im));
    }
    t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad())
}

/// Parses `σ0:σ1:τ0:τ1`.
pub fn parse_window(s: &str) -> std::result::Result<Rect, String> {
    let v: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| format!("cannot parse window '{s}'"))?;
    if v.len() != 4 {
        return Err(format!("window needs four fields, got '{s}'"));
    }
    let r = Rect::new(v[0], v[1], v[2], v[3]);
    if !(r.re0 <= r.re1 && r.im0 <= r.im1) {
        return Err(format!("empty or inverted window '{s}'"));
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub sigma: f64,
    pub tau: f64,
    pub region: PhaseLabel,
    pub p: f64,
}

fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let m = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=m).map(|k| lo + k as f64 * step).collect()
}

/// Phase label and `p(β)` at every node of the grid, τ varying fastest.
pub fn phase_grid(window: Rect, step: f64) -> Result<Vec<PhaseRow>> {
    let ordered = window.re0 <= window.re1 && window.im0 <= window.im1;
    let finite = [window.re0, window.re1, window.im0, window.im1].iter().all(|v| v.is_finite());
    if !(step > 0.0 && step.is_finite()) || !ordered || !finite {
        return Err(Error::InvalidParameter("grid needs a positive step and a non-empty window".into()));
    }
    let mut rows = Vec::new();
    for s in axis(window.re0, window.re1, step) {
        for t in axis(window.im0, window.im1, step) {
            let b = ComplexParam::new(s, t);
            rows.push(PhaseRow { sigma: s, tau: t, region: classify(b), p: limit_p(b) });
        }
    }
    Ok(rows)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Outputs { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        let s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
        self.write(name, s.as_bytes())
    }

    fn digests(&self) -> Result<Vec<OutputDigest>> {
        self.files
            .iter()
            .map(|f| Ok(OutputDigest { file: f.clone(), sha256: sha256_file(&self.dir.join(f))? }))
            .collect()
    }
}

struct RunOutcome {
    config: Option<RemConfig>,
    parameters: serde_json::Value,
    seed_path: Option<SeedPath>,
    gate_failed: bool,
}

fn csv_rows<T: Serialize>(header: &str, rows: &[T], line: impl Fn(&T) -> String, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => serde_json::to_vec_pretty(rows).map_err(|e| Error::Io(e.to_string())),
        Format::Csv => {
            let mut s = String::with_capacity(rows.len() * 32);
            s.push_str(header);
            s.push('\n');
            for r in rows {
                s.push_str(&line(r));
                s.push('\n');
            }
            Ok(s.into_bytes())
        }
    }
}

fn ext(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn cmd_phase(window: Rect, step: f64, format: Format, out: &mut Outputs) -> Result<RunOutcome> {
    let rows = phase_grid(window, step)?;
    let body = csv_rows("sigma,tau,region,p", &rows, |r| format!("{},{},{},{}", r.sigma, r.tau, r.region, r.p), format)?;
    out.write(&format!("phase.{}", ext(format)), &body)?;
    Ok(RunOutcome {
        config: None,
        parameters: serde_json::json!({ "window": window, "grid_step": step, "rows": rows.len() }),
        seed_path: None,
        gate_failed: false,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
struct ZeroRow {
    re: f64,
    im: f64,
    multiplicity: u32,
    residual: f64,
}

fn cmd_zeros(model: &ModelArgs, window: Rect, replicas: usize, step: f64, format: Format, out: &mut Outputs) -> Result<RunOutcome> {
    let cfg = model.config()?;
    if replicas == 0 || !(step > 0.0) {
        return Err(Error::InvalidParameter("replicas and grid step must be positive".into()));
    }
    let ns = (window.width() / step).ceil().max(1.0) as usize;
    let nt = (window.height() / step).ceil().max(1.0) as usize;
    let mut hist = vec![0u64; ns * nt];
    let mut counts = Vec::with_capacity(replicas);
    for r in 0..replicas as u64 {
        let batch = gaussian_pairs(&cfg, stream_index(r, Purpose::Energies));
        let zs = partition_zeros(&batch, cfg.n, window)?;
        let rows: Vec<ZeroRow> = zs
            .zeros
            .iter()
            .zip(&zs.multiplicities)
            .zip(&zs.residuals)
            .map(|((z, &m), &res)| ZeroRow { re: z.re, im: z.im, multiplicity: m, residual: res })
            .collect();
        for z in &zs.zeros {
            let i = (((z.re - window.re0) / step) as usize).min(ns - 1);
            let j = (((z.im - window.im0) / step) as usize).min(nt - 1);
            hist[i * nt + j] += 1;
        }
        counts.push(zs.count());
        let body = csv_rows(
            "re,im,multiplicity,residual",
            &rows,
            |z| format!("{},{},{},{}", z.re, z.im, z.multiplicity, z.residual),
            format,
        )?;
        out.write(&format!("zeros_{r:05}.{}", ext(format)), &body)?;
    }
    let cell = step * step;
    let mut h = String::from("sigma,tau,count,density\n");
    for i in 0..ns {
        for j in 0..nt {
            let c = hist[i * nt + j];
            let s = window.re0 + (i as f64 + 0.5) * step;
            let t = window.im0 + (j as f64 + 0.5) * step;
            h.push_str(&format!("{s},{t},{c},{}\n", c as f64 / (replicas as f64 * cell)));
        }
    }
    out.write("density.csv", h.as_bytes())?;
    let mean = counts.iter().sum::<u64>() as f64 / replicas as f64;
    let summary = serde_json::json!({
        "replicas": replicas,
        "counts": counts,
        "mean_count": mean,
        "mean_density": mean / window.area(),
    });
    out.json("summary.json", &summary)?;
    Ok(RunOutcome {
        config: Some(cfg),
        parameters: serde_json::json!({ "window": window, "replicas": replicas, "grid_step": step }),
        seed_path: Some(SeedPath::for_replica(cfg.seed, 0, Purpose::Energies)),
        gate_failed: false,
    })
}

fn cmd_fluct(model: &ModelArgs, beta: Complex64, replicas: usize, asymptotic: bool, out: &mut Outputs) -> Result<RunOutcome> {
    let cfg = model.config()?;
    let centering = if asymptotic { Centering::Asymptotic } else { Centering::Truncated };
    let plan = make_plan_with(ComplexParam::from(beta), cfg.rho, cfg.n, centering)?;
    let ens = run_ensemble(&plan, &cfg, replicas)?;
    let mut buf = Vec::new();
    ens.write_csv(&mut buf)?;
    out.write("samples.csv", &buf)?;
    let (report, passed) = match plan.limit {
        LimitLaw::ComplexGaussian { .. } => {
            let r = test_gaussian_limit(&ens)?;
            // at σ² = ½ only the second moment is gated
            let p = if r.robust_gate { r.checks[0].passed } else { r.passed };
            (serde_json::to_value(&r), p)
        }
        LimitLaw::IsotropicStable { .. } => {
            let r = test_stable_limit(&ens)?;
            (serde_json::to_value(&r), r.passed)
        }
        LimitLaw::ZetaP { .. } => {
            let r = test_zetap_limit(&ens, replicas, DEFAULT_ZETA_HORIZON)?;
            (serde_json::to_value(&r), r.passed)
        }
        LimitLaw::RealGaussian { .. } | LimitLaw::OutOfScopeRealCase => (Ok(serde_json::Value::Null), true),
    };
    let report = report.map_err(|e| Error::Io(e.to_string()))?;
    out.json(
        "report.json",
        &serde_json::json!({ "case_tag": plan.case_tag, "plan": plan, "test": report, "passed": passed }),
    )?;
    Ok(RunOutcome {
        config: Some(cfg),
        parameters: serde_json::json!({ "beta": beta, "replicas": replicas, "centering": centering }),
        seed_path: Some(SeedPath::for_replica(cfg.seed, 0, Purpose::Energies)),
        gate_failed: !passed,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
struct ZetaRow {
    replica: usize,
    re: f64,
    im: f64,
}

fn cmd_zeta(beta: Complex64, seed: u64, replicas: usize, horizon: Option<f64>, tol: f64, format: Format, out: &mut Outputs) -> Result<RunOutcome> {
    let horizon = match horizon {
        Some(h) => h,
        None => zetap_choose_horizon(beta, tol)?,
    };
    let mut rows = Vec::with_capacity(replicas);
    for j in 0..replicas {
        let z = ZetaPSample::new(horizon, SeedPath::for_replica(seed, j as u64, Purpose::Arrivals))?;
        let (v, _) = z.zeta_with_derivative(beta)?;
        let mut rng = SeedPath::for_replica(seed, j as u64, Purpose::TailCompletion).rng();
        let v = v + z.tail_draw(beta, &mut rng)?;
        rows.push(ZetaRow { replica: j, re: v.re, im: v.im });
    }
    let body = csv_rows("replica,re,im", &rows, |r| format!("{},{},{}", r.replica, r.re, r.im), format)?;
    out.write(&format!("zeta.{}", ext(format)), &body)?;
    Ok(RunOutcome {
        config: None,
        parameters: serde_json::json!({ "beta": beta, "replicas": replicas, "horizon": horizon }),
        seed_path: Some(SeedPath::for_replica(seed, 0, Purpose::Arrivals)),
        gate_failed: false,
    })
}

fn cmd_gaf(radius: f64, center: Complex64, seed: u64, replicas: usize, out: &mut Outputs) -> Result<RunOutcome> {
    let stats = gaf_zero_stats(center, radius, replicas, seed)?;
    let mut s = String::from("replica,count\n");
    for (j, c) in stats.counts.iter().enumerate() {
        s.push_str(&format!("{j},{c}\n"));
    }
    out.write("gaf_counts.csv", s.as_bytes())?;
    out.json(
        "summary.json",
        &serde_json::json!({ "mean_count": stats.mean_count, "expected_count": radius * radius, "replicas": replicas }),
    )?;
    Ok(RunOutcome {
        config: None,
        parameters: serde_json::json!({ "radius": radius, "center": center, "replicas": replicas }),
        seed_path: Some(SeedPath::for_replica(seed, 0, Purpose::GafCoefficients)),
        gate_failed: false,
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Phase { .. } => "phase",
        Command::Zeros { .. } => "zeros",
        Command::Fluct { .. } => "fluct",
        Command::Zeta { .. } => "zeta",
        Command::Gaf { .. } => "gaf",
        Command::Rerun { .. } => "rerun",
    }
}

/// Executes `args` (without the program name) into `out`; returns the manifest and
/// whether a statistical gate failed.
fn execute(cli: &Cli, args: &[String]) -> Result<(RunManifest, bool)> {
    let started = chrono::Utc::now().to_rfc3339();
    let mut out = Outputs::new(&cli.out)?;
    let outcome = match &cli.command {
        Command::Phase { window, grid_step } => cmd_phase(*window, *grid_step, cli.format, &mut out)?,
        Command::Zeros { model, window, replicas, grid_step } => {
            cmd_zeros(model, *window, *replicas, *grid_step, cli.format, &mut out)?
        }
        Command::Fluct { model, beta, replicas, asymptotic_centering } => {
            cmd_fluct(model, *beta, *replicas, *asymptotic_centering, &mut out)?
        }
        Command::Zeta { beta, seed, replicas, horizon, tol } => {
            cmd_zeta(*beta, *seed, *replicas, *horizon, *tol, cli.format, &mut out)?
        }
        Command::Gaf { radius, center, seed, replicas } => cmd_gaf(*radius, *center, *seed, *replicas, &mut out)?,
        Command::Rerun { .. } => unreachable!("handled by the caller"),
    };
    let manifest = RunManifest {
        command: command_name(&cli.command).into(),
        args: args.to_vec(),
        config: outcome.config,
        parameters: outcome.parameters,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        seed_path: outcome.seed_path,
        outputs: out.digests()?,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(cli.out.join(MANIFEST_FILE), text)?;
    Ok((manifest, outcome.gate_failed))
}

/// Re-executes a manifest into `out` and compares every digest.
pub fn rerun(manifest_path: &Path, out: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(manifest_path)?;
    let old: RunManifest = serde_json::from_str(&text).map_err(|e| Error::Io(e.to_string()))?;
    let mut args = strip_out(&old.args);
    args.push("--out".into());
    args.push(out.to_string_lossy().into_owned());
    let cli = Cli::try_parse_from(std::iter::once("crem".to_string()).chain(args.iter().cloned()))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let (new, _) = execute(&cli, &args)?;
    if new.outputs != old.outputs {
        return Err(Error::Io("rerun outputs differ from the manifest digests".into()));
    }
    Ok(new)
}

fn strip_out(args: &[String]) -> Vec<String> {
    let mut v = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            v.push(a.clone());
        }
    }
    v
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<String> = argv.into_iter().map(|a| a.into().to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = cli.threads {
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let result = match &cli.command {
        Command::Rerun { manifest } => rerun(manifest, &cli.out).map(|_| false),
        _ => execute(&cli, &argv[1..]).map(|(_, failed)| failed),
    };
    match result {
        Ok(false) => EXIT_OK,
        Ok(true) => EXIT_GATE_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_forms() {
        let c = |a, b| Complex64::new(a, b);
        assert_eq!(parse_beta("1.1+0.9i").unwrap(), c(1.1, 0.9));
        assert_eq!(parse_beta("1.1-0.9i").unwrap(), c(1.1, -0.9));
        assert_eq!(parse_beta("1.1,0.9").unwrap(), c(1.1, 0.9));
        assert_eq!(parse_beta("-0.5").unwrap(), c(-0.5, 0.0));
        assert_eq!(parse_beta("2i").unwrap(), c(0.0, 2.0));
        assert_eq!(parse_beta("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_beta("1e-3+2e-1i").unwrap(), c(1e-3, 0.2));
        assert!(parse_beta("x+yi").is_err());
    }

    #[test]
    fn window_forms() {
        let r = parse_window("0.1:0.5:1.2:1.6").unwrap();
        assert_eq!((r.re0, r.re1, r.im0, r.im1), (0.1, 0.5, 1.2, 1.6));
        assert!(parse_window("0:1:2").is_err());
        assert!(parse_window("1:0:0:1").is_err());
    }

    #[test]
    fn phase_single_point_and_empty() {
        let rows = phase_grid(Rect::new(0.0, 0.0, 1.0, 1.0), 0.01).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].region, PhaseLabel::Boundary13);
        assert!((rows[0].p - 0.5).abs() < 1e-15);
        assert!(phase_grid(Rect::new(0.0, 1.0, 0.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn phase_region_areas() {
        let rows = phase_grid(Rect::new(-2.0, 2.0, -2.0, 2.0), 0.01).unwrap();
        assert_eq!(rows.len(), 160_801);
        let count = |l| rows.iter().filter(|r| r.region == l).count() as f64 * 1e-4;
        // clipped to [−2,2]²: B3 = 4√2 − 1 − π/2, B2 = 4(4 − √2) − 1, B1 the rest
        let b3 = 4.0 * 2f64.sqrt() - 1.0 - std::f64::consts::FRAC_PI_2;
        let b2 = 4.0 * (4.0 - 2f64.sqrt()) - 1.0;
        let b1 = 16.0 - b3 - b2;
        for (l, a) in [(PhaseLabel::B1, b1), (PhaseLabel::B2, b2), (PhaseLabel::B3, b3)] {
            assert!((count(l) - a).abs() < 0.1, "{l}: {} vs {a}", count(l));
        }
    }

    #[test]
    fn strip_out_removes_both_forms() {
        let a: Vec<String> = ["phase", "--out", "x", "--out=y", "--grid-step", "0.5"].iter().map(|s| s.to_string()).collect();
        assert_eq!(strip_out(&a), vec!["phase", "--grid-step", "0.5"]);
    }
}
