use crem::cli::parse_beta;
use crem::fluct::{case_tag, make_plan, CaseTag};
use crem::partition::{eval_grid, eval_point};
use crem::phase::{classify, limit_p, ComplexParam, PhaseLabel, RemConfig};
use crem::sampling::SampleBatch;
use num_complex::Complex64;
use proptest::prelude::*;

fn energies(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, len..=len)
}

fn ln_z(batch: &SampleBatch, n: f64, s: f64, t: f64) -> Complex64 {
    eval_point(batch, n, ComplexParam::new(s, t)).unwrap().ln()
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    let d = a - b;
    // compare phases modulo 2π
    let dphase = (d.im / std::f64::consts::TAU).round() * std::f64::consts::TAU;
    (d.re.abs() < tol) && ((d.im - dphase).abs() < tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_sum_ignores_order(
        x in energies(24), y in energies(24), seed in any::<u64>(),
        s in -1.5f64..1.5, t in -1.5f64..1.5,
    ) {
        let n = 24f64.ln();
        let a = SampleBatch::from_arrays(x.clone(), y.clone(), 0.3).unwrap();
        let mut idx: Vec<usize> = (0..x.len()).collect();
        let mut state = seed | 1;
        for i in (1..idx.len()).rev() {
            state ^= state << 13; state ^= state >> 7; state ^= state << 17;
            idx.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let px = idx.iter().map(|&i| x[i]).collect();
        let py = idx.iter().map(|&i| y[i]).collect();
        let b = SampleBatch::from_arrays(px, py, 0.3).unwrap();
        prop_assert!(close(ln_z(&a, n, s, t), ln_z(&b, n, s, t), 1e-9));
    }

    #[test]
    fn aligned_energies_conjugate(x in energies(20), s in -1.5f64..1.5, t in -1.5f64..1.5) {
        let n = 20f64.ln();
        let one = SampleBatch::from_arrays(x.clone(), x.clone(), 1.0).unwrap();
        let anti = SampleBatch::from_arrays(x.clone(), x.iter().map(|v| -v).collect(), -1.0).unwrap();
        let z = ln_z(&one, n, s, t);
        prop_assert!(close(ln_z(&one, n, s, -t), z.conj(), 1e-9));
        prop_assert!(close(ln_z(&anti, n, s, t), z.conj(), 1e-9));
    }

    #[test]
    fn grid_node_equals_point(
        seed in 0u64..1000, s0 in -1.5f64..1.0, t0 in -1.5f64..1.0, h in 0.01f64..0.2,
    ) {
        let cfg = RemConfig::from_n(5.0, 0.4, seed).unwrap();
        let batch = crem::sampling::gaussian_pairs(&cfg, 0);
        let sa: Vec<f64> = (0..4).map(|i| s0 + h * i as f64).collect();
        let ta: Vec<f64> = (0..3).map(|j| t0 + h * j as f64).collect();
        let g = eval_grid(&batch, &cfg, &sa, &ta, usize::MAX).unwrap();
        for (i, &s) in sa.iter().enumerate() {
            for (j, &t) in ta.iter().enumerate() {
                let p = eval_point(&batch, cfg.n, ComplexParam::new(s, t)).unwrap();
                prop_assert_eq!(&g.values[i][j], &p);
            }
        }
    }

    #[test]
    fn limit_is_continuous(s in -2.0f64..2.0, t in -2.0f64..2.0, ds in -1e-7f64..1e-7, dt in -1e-7f64..1e-7) {
        let a = limit_p(ComplexParam::new(s, t));
        let b = limit_p(ComplexParam::new(s + ds, t + dt));
        // p is piecewise smooth with gradient bounded by 4 on this square
        prop_assert!((a - b).abs() <= 4.0 * (ds.abs() + dt.abs()) + 1e-14);
    }

    #[test]
    fn phase_symmetries(s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let l = classify(ComplexParam::new(s, t));
        prop_assert_eq!(classify(ComplexParam::new(-s, t)), l);
        prop_assert_eq!(classify(ComplexParam::new(s, -t)), l);
        let p = limit_p(ComplexParam::new(s, t));
        prop_assert_eq!(limit_p(ComplexParam::new(-s, -t)), p);
    }

    #[test]
    fn case_tags_refine_phases(s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let b = ComplexParam::new(s, t);
        let expected = match classify(b) {
            PhaseLabel::B1 => vec![CaseTag::C1a, CaseTag::C2b],
            PhaseLabel::B2 => vec![CaseTag::C2a],
            PhaseLabel::B3 => vec![CaseTag::C1b],
            _ => return Ok(()),
        };
        prop_assert!(expected.contains(&case_tag(b)), "{:?} at {}", case_tag(b), b);
    }

    #[test]
    fn plan_reflections(s in 0.05f64..1.8, t in 0.05f64..1.8, rho in -0.95f64..0.95) {
        prop_assume!((s * s - 0.5).abs() > 1e-6 && (s + t - std::f64::consts::SQRT_2).abs() > 1e-6);
        let n = 12.0;
        let a = make_plan(ComplexParam::new(s, t), rho, n).unwrap();
        let mirrored = make_plan(ComplexParam::new(-s, -t), rho, n).unwrap();
        prop_assert_eq!(a.case_tag, mirrored.case_tag);
        prop_assert!(mirrored.mirrored);
        prop_assert!((a.ln_v - mirrored.ln_v).norm() < 1e-9);
        // β̄ conjugates Z, while flipping τ and ρ together leaves its law unchanged
        let c = make_plan(ComplexParam::new(s, -t), rho, n).unwrap();
        let f = make_plan(ComplexParam::new(s, -t), -rho, n).unwrap();
        prop_assert_eq!(a.case_tag, c.case_tag);
        match (a.ln_m, c.ln_m, f.ln_m) {
            (Some(x), Some(y), Some(z)) => {
                prop_assert!(close(x, y.conj(), 1e-9));
                prop_assert!(close(x, z, 1e-9));
            }
            (x, y, z) => {
                prop_assert_eq!(x.is_some(), y.is_some());
                prop_assert_eq!(x.is_some(), z.is_some());
            }
        }
    }

    #[test]
    fn beta_text_round_trips(s in -10.0f64..10.0, t in -10.0f64..10.0) {
        let text = ComplexParam::new(s, t).to_string();
        prop_assert_eq!(parse_beta(&text).unwrap(), Complex64::new(s, t));
    }
}
