//! Student's t tail probabilities against direct quadrature of the density.

use volret::stats::{student_t_cdf, two_sided_p};

/// `Γ((ν+1)/2) / Γ(ν/2)` by the two-step recursion from `ν = 1, 2`.
fn gamma_ratio(df: u32) -> f64 {
    let pi = std::f64::consts::PI;
    let (mut g, start) = if df % 2 == 1 { (1.0 / pi.sqrt(), 1) } else { (pi.sqrt() / 2.0, 2) };
    let mut nu = start;
    while nu < df {
        g *= (nu as f64 + 1.0) / nu as f64;
        nu += 2;
    }
    g
}

fn density(x: f64, df: u32) -> f64 {
    let nu = df as f64;
    gamma_ratio(df) / (nu * std::f64::consts::PI).sqrt() * (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0)
}

/// `P(0 <= T <= t)` by composite Simpson.
fn simpson(t: f64, df: u32) -> f64 {
    let steps = 4000;
    let h = t / steps as f64;
    let mut s = density(0.0, df) + density(t, df);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * density(i as f64 * h, df);
    }
    s * h / 3.0
}

#[test]
fn cdf_matches_quadrature() {
    let mut worst = 0.0f64;
    for df in [1, 2, 3, 4, 5, 7, 10, 15, 20, 30, 50, 100, 199, 200, 350, 500] {
        for k in 0..=40 {
            let t = k as f64 * 0.25;
            let want = 0.5 + simpson(t, df);
            for (x, w) in [(t, want), (-t, 1.0 - want)] {
                let err = (student_t_cdf(x, df as f64) - w).abs();
                worst = worst.max(err);
                assert!(err < 1e-8, "df={df} t={x}: {} vs {w}", student_t_cdf(x, df as f64));
            }
            let p = two_sided_p(t, df as f64);
            assert!((p - (1.0 - 2.0 * simpson(t, df))).abs() < 1e-8);
        }
    }
    assert!(worst < 1e-8);
}

#[test]
fn tail_is_monotone_and_bounded() {
    for df in [1.0, 3.0, 30.0, 499.0] {
        let mut prev = 1.0;
        for k in 0..200 {
            let p = two_sided_p(k as f64 * 0.1, df);
            assert!(p <= prev && (0.0..=1.0).contains(&p));
            prev = p;
        }
    }
    assert_eq!(two_sided_p(0.0, 5.0), 1.0);
    assert_eq!(two_sided_p(f64::INFINITY, 5.0), 0.0);
}
