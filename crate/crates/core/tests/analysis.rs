use noma_outage::analysis::{
    bessel_k, op_closed_form, op_closed_form_detailed, op_numerical, op_numerical_with, OpTermContext,
};
use noma_outage::error::Error;
use noma_outage::fading::EtaTable;
use noma_outage::link::SystemConfig;
use proptest::prelude::*;

fn config(snr_db: f64, m: f64) -> SystemConfig {
    SystemConfig { snr_db, m_sr: m, m_ru: m, ..SystemConfig::default() }
}

/// `int_0^inf exp(-x cosh t) cosh(nu t) dt` by the trapezoid rule, which is
/// spectrally accurate for this doubly-decaying integrand.
fn bessel_k_integral(nu: i32, x: f64) -> f64 {
    let h = 1.0 / 64.0;
    let mut sum = 0.5 * (-x).exp();
    let mut t: f64 = h;
    loop {
        let term = (-x * t.cosh()).exp() * (nu as f64 * t).cosh();
        sum += term;
        if term < sum * 1e-18 {
            break;
        }
        t += h;
    }
    sum * h
}

#[test]
fn bessel_k_matches_integral_representation() {
    for nu in 0..=12 {
        for &x in &[1e-3, 0.05, 0.5, 1.0, 1.999, 2.001, 3.0, 10.0, 50.0, 300.0, 700.0] {
            let got = bessel_k(nu, x).unwrap();
            let want = bessel_k_integral(nu, x);
            if want < f64::MIN_POSITIVE {
                assert!(got.underflow);
                continue;
            }
            assert!(((got.value - want) / want).abs() < 1e-10, "nu={nu} x={x}: {} vs {want}", got.value);
        }
    }
    let k0 = bessel_k(0, 1.0).unwrap().value;
    assert!((k0 - 0.421_024_438_2).abs() < 1e-10);
}

#[test]
fn bessel_k_small_argument_and_symmetry() {
    let x = 1e-4;
    assert!((x * bessel_k(1, x).unwrap().value - 1.0).abs() < 1e-4);
    let k0 = bessel_k(0, 1e-6).unwrap().value;
    assert!(((k0 - bessel_k_integral(0, 1e-6)) / k0).abs() < 1e-10);
    for &x in &[0.1, 1.5, 4.0, 30.0] {
        assert_eq!(bessel_k(-2, x).unwrap(), bessel_k(2, x).unwrap());
        assert_eq!(bessel_k(-7, x).unwrap(), bessel_k(7, x).unwrap());
    }
}

#[test]
fn bessel_k_domain_and_underflow() {
    assert!(matches!(bessel_k(0, 0.0), Err(Error::Domain(_))));
    assert!(matches!(bessel_k(1, -1.0), Err(Error::Domain(_))));
    let r = bessel_k(0, 800.0).unwrap();
    assert!(r.underflow && r.value == 0.0);
    assert!(!bessel_k(0, 700.0).unwrap().underflow);
}

#[test]
fn closed_form_matches_high_precision_reference() {
    // 50-digit evaluations of the same integral with the published table,
    // whose k = 3 row equals the majority row.
    let published = EtaTable::published();
    let op1 = op_closed_form_detailed(1, &config(20.0, 1.0), &published).unwrap().value;
    assert!((op1 / 0.007_263_708_891_015_14 - 1.0).abs() < 1e-9, "{op1}");
    let op3 = op_closed_form(3, &config(30.0, 1.0)).unwrap();
    assert!((op3 / 1.501_788_18e-7 - 1.0).abs() < 1e-7, "{op3}");
    for (k, want) in [(1, 0.71612), (2, 0.59888), (3, 0.55089)] {
        let got = op_closed_form_detailed(k, &config(10.0, 1.0), &published).unwrap().value;
        assert!((got - want).abs() < 1e-5, "k={k}: {got}");
    }
}

#[test]
fn closed_form_agrees_with_quadrature_on_mixed_grid() {
    let mut worst = 0.0f64;
    for &snr in &[0.0, 10.0, 20.0, 30.0, 40.0] {
        for &(w, xi, d) in &[(0.5, 0.0, 0.5), (0.3, 0.02, 0.4), (0.7, 0.01, 0.7)] {
            for &(m_sr, m_ru, n) in &[(1.0, 1.0, (2, 2, 2)), (2.0, 2.0, (1, 2, 2)), (3.0, 1.0, (2, 1, 1))] {
                let cfg = SystemConfig {
                    snr_db: snr,
                    w,
                    xi,
                    d_sr: d,
                    m_sr,
                    m_ru,
                    n_s: n.0,
                    n_rr: n.1,
                    n_u: n.2,
                    ..SystemConfig::default()
                };
                for k in 1..=3 {
                    let closed = op_closed_form_detailed(k, &cfg, &EtaTable::default()).unwrap();
                    let quad = op_numerical(k, &cfg).unwrap();
                    assert!((-1e-9..=1.0 + 1e-9).contains(&closed.unclamped));
                    if quad > 1e-12 {
                        let rel = ((closed.value - quad) / quad).abs();
                        worst = worst.max(rel);
                        assert!(rel < 1e-6, "k={k} {cfg:?}: {} vs {quad}", closed.value);
                    }
                }
            }
        }
    }
    println!("worst relative gap {worst:e}");
}

#[test]
fn six_fold_terms_sum_to_folded_sum() {
    let cfg = config(15.0, 2.0);
    let eta = EtaTable::default();
    for k in 1..=3 {
        let ctx = OpTermContext::new(k, &cfg, &eta).unwrap();
        assert!(ctx.indices().iter().all(|i| ctx.b1(i.p) > 0.0 && ctx.b2(i.u) > 0.0));
        let literal: f64 = ctx.indices().into_iter().map(|i| ctx.term(i)).sum();
        let detail = op_closed_form_detailed(k, &cfg, &eta).unwrap();
        // OP = F + (1 - F) + S = 1 + S because every eta row sums to one
        let via_terms = 1.0 + literal;
        assert!((via_terms - detail.unclamped).abs() < 1e-9, "k={k}: {via_terms} vs {}", detail.unclamped);
    }
}

#[test]
fn limits_of_the_threshold() {
    let mut cfg = config(20.0, 1.0);
    cfg.gamma_th = vec![1e-9; 3];
    for k in 1..=3 {
        assert!(op_closed_form(k, &cfg).unwrap() < 1e-6);
        assert!(op_numerical(k, &cfg).unwrap() < 1e-6);
    }
    cfg.gamma_th = vec![0.0; 3];
    assert_eq!(op_closed_form(2, &cfg).unwrap(), 0.0);
    let absurd = config(-40.0, 1.0);
    for k in 1..=3 {
        assert!(op_closed_form(k, &absurd).unwrap() > 1.0 - 1e-9);
        assert!(op_numerical(k, &absurd).unwrap() > 1.0 - 1e-9);
    }
}

#[test]
fn quadrature_accepts_non_integer_fading() {
    let cfg = config(15.0, 1.5);
    assert!(matches!(op_closed_form(1, &cfg), Err(Error::Unsupported(_))));
    let mid = op_numerical(1, &cfg).unwrap();
    let lo = op_numerical(1, &config(15.0, 1.0)).unwrap();
    let hi = op_numerical(1, &config(15.0, 2.0)).unwrap();
    assert!(hi < mid && mid < lo, "{hi} {mid} {lo}");
}

#[test]
fn scope_and_feasibility_errors() {
    let mut cfg = config(20.0, 1.0);
    cfg.n_rt = 3;
    assert!(matches!(op_closed_form(1, &cfg), Err(Error::Unsupported(_))));
    assert!(matches!(op_numerical(1, &cfg), Err(Error::Unsupported(_))));
    let mut cfg = config(20.0, 1.0);
    cfg.a = vec![0.7, 0.3];
    cfg.gamma_th = vec![1.0, 1.0];
    assert!(matches!(op_closed_form(1, &cfg), Err(Error::Unsupported(_))));
    let mut cfg = config(20.0, 1.0);
    cfg.xi = 0.2;
    assert!(matches!(op_closed_form(3, &cfg), Err(Error::Infeasible { stage: 2, .. })));
    assert!(op_closed_form(1, &cfg).is_ok());
    assert!(matches!(op_closed_form(4, &config(20.0, 1.0)), Err(Error::Domain(_))));
}

#[test]
fn closed_form_monotone_in_snr() {
    for k in 1..=3 {
        let mut prev = 1.0;
        for step in 0..=50 {
            let op = op_closed_form(k, &config(step as f64, 1.0)).unwrap();
            assert!(op <= prev * (1.0 + 1e-12), "k={k} snr={step}");
            prev = op;
        }
    }
}

#[test]
fn sic_residual_effects() {
    for snr in [5.0, 15.0, 25.0, 35.0] {
        let base = op_closed_form(1, &config(snr, 1.0)).unwrap();
        for xi in [0.02, 0.1] {
            let cfg = SystemConfig { xi, ..config(snr, 1.0) };
            let op = op_closed_form(1, &cfg).unwrap();
            assert!((op - base).abs() <= 1e-12 * base.max(1e-300));
        }
        for k in 2..=3 {
            let perfect = op_closed_form(k, &config(snr, 1.0)).unwrap();
            let imperfect = op_closed_form(k, &SystemConfig { xi: 0.02, ..config(snr, 1.0) }).unwrap();
            assert!(imperfect >= perfect);
        }
    }
}

#[test]
fn published_table_shifts_only_lower_ranks() {
    let cfg = config(20.0, 1.0);
    let published = EtaTable::published();
    let a = op_numerical_with(3, &cfg, &published).unwrap();
    let b = op_numerical(3, &cfg).unwrap();
    assert!((a - b).abs() < 1e-15);
    let a = op_numerical_with(2, &cfg, &published).unwrap();
    let b = op_numerical(2, &cfg).unwrap();
    assert!((a - b).abs() > 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_equals_quadrature(
        snr in 0.0f64..40.0,
        w in 0.1f64..0.9,
        xi in 0.0f64..0.02,
        d in 0.2f64..0.8,
        m in 1u32..=2,
        k in 1usize..=3,
    ) {
        let cfg = SystemConfig { snr_db: snr, w, xi, d_sr: d, m_sr: m as f64, m_ru: m as f64, ..SystemConfig::default() };
        let closed = op_closed_form_detailed(k, &cfg, &EtaTable::default()).unwrap();
        let quad = op_numerical(k, &cfg).unwrap();
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&closed.unclamped));
        if quad > 1e-12 {
            prop_assert!(((closed.value - quad) / quad).abs() < 1e-6, "{} vs {}", closed.value, quad);
        }
    }
}
