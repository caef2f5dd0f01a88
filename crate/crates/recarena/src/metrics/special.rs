//! Special functions backing the correlation significance test.
//!
//! Only what the two-sided t-test needs: log-gamma and the regularized
//! incomplete beta function, in their classic continued-fraction forms.

/// Natural log of the gamma function (Lanczos approximation, x > 0).
pub fn ln_gamma(x: f64) -> f64 {
    const COF: [f64; 6] = [
        76.180_091_729_471_46,
        -86.505_320_329_416_77,
        24.014_098_240_830_91,
        -1.231_739_572_450_155,
        0.120_865_097_386_617_9e-2,
        -0.539_523_938_495_3e-5,
    ];
    debug_assert!(x > 0.0);
    let mut tmp = x + 5.5;
    tmp -= (x + 0.5) * tmp.ln();
    let mut ser = 1.000_000_000_190_015;
    let mut y = x;
    for c in COF {
        y += 1.0;
        ser += c / y;
    }
    -tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

/// Regularized incomplete beta function I_x(a, b) for a, b > 0 and
/// x in [0, 1].
pub fn betai(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0 && (0.0..=1.0).contains(&x));
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let bt =
        (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln()).exp();
    // The continued fraction converges fast only on one side of the
    // mean; use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) on the other.
    if x < (a + 1.0) / (a + b + 2.0) {
        bt * betacf(a, b, x) / a
    } else {
        1.0 - bt * betacf(b, a, 1.0 - x) / b
    }
}

/// Continued-fraction kernel for `betai` (modified Lentz's method).
fn betacf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 200;
    const EPS: f64 = 3.0e-14;
    const FPMIN: f64 = 1.0e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Two-sided p-value of a t statistic with `dof` degrees of freedom:
/// P(|T| >= |t|) = I_{dof/(dof+t^2)}(dof/2, 1/2).
pub fn t_two_sided_p(t: f64, dof: f64) -> f64 {
    debug_assert!(dof > 0.0);
    if !t.is_finite() {
        return 0.0;
    }
    betai(0.5 * dof, 0.5, dof / (dof + t * t)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_factorials() {
        // Gamma(n) = (n-1)!
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(1.0)).abs() < 1e-12);
        // Gamma(1/2) = sqrt(pi)
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
    }

    #[test]
    fn betai_known_values() {
        // I_x(1,1) = x (uniform CDF)
        for x in [0.0, 0.25, 0.5, 0.9, 1.0] {
            assert!((betai(1.0, 1.0, x) - x).abs() < 1e-12);
        }
        // arcsine distribution: I_{1/2}(1/2, 1/2) = 1/2
        assert!((betai(0.5, 0.5, 0.5) - 0.5).abs() < 1e-12);
        // complement symmetry
        let v = betai(2.5, 1.5, 0.3);
        let w = betai(1.5, 2.5, 0.7);
        assert!((v + w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn t_two_sided_matches_closed_form_at_two_dof() {
        // For dof = 2 the survival function has the closed form
        // p = 1 - t / sqrt(t^2 + 2).
        for t in [0.1f64, 0.5, 1.0, 2.8731, 10.0] {
            let exact = 1.0 - t / (t * t + 2.0).sqrt();
            assert!((t_two_sided_p(t, 2.0) - exact).abs() < 1e-10);
        }
        assert!((t_two_sided_p(0.0, 2.0) - 1.0).abs() < 1e-12);
        assert_eq!(t_two_sided_p(f64::INFINITY, 2.0), 0.0);
    }
}
