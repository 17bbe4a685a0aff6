//! Minimal special functions: error function and log-gamma.
//!
//! Only what the crate needs: Gaussian tail masses and Lebesgue volumes of
//! l_p balls. Both routines are classical, a Maclaurin series for small
//! arguments, a Lentz continued fraction for the complementary tail, and a
//! Lanczos approximation for gamma. Accuracy is checked against frozen
//! reference values in the tests below.

/// erf(x) for any real x.
pub(crate) fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x < 1.0 {
        erf_series(x)
    } else {
        1.0 - erfc_cf(x)
    }
}

/// erfc(x) for any real x, accurate in the far tail.
#[allow(dead_code)]
pub(crate) fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 1.0 {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// Upper tail of the standard normal distribution, P(X > x).
#[allow(dead_code)]
pub(crate) fn normal_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Mass assigned by the standard normal distribution to [-l, l].
pub(crate) fn normal_box_mass(l: f64) -> f64 {
    erf(l / std::f64::consts::SQRT_2)
}

// Maclaurin series, converges quickly for |x| < 1.
fn erf_series(x: f64) -> f64 {
    let two_over_sqrt_pi = 2.0 / std::f64::consts::PI.sqrt();
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0usize;
    loop {
        n += 1;
        term *= -x2 / n as f64;
        let contrib = term / (2 * n + 1) as f64;
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs().max(1e-300) || n > 60 {
            break;
        }
    }
    two_over_sqrt_pi * sum
}

// Continued fraction erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
// evaluated with the modified Lentz algorithm. Good for x >= 1.
fn erfc_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x.max(TINY);
    let mut c = f;
    let mut d = 0.0f64;
    for k in 1..200 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() / f
}

// Lanczos approximation with g = 7, nine coefficients.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Gamma(x) for x > 0.5 (the only range the crate uses).
pub(crate) fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.5, "ln_gamma restricted to x > 0.5, got {x}");
    let z = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, &coeff) in LANCZOS.iter().enumerate().skip(1) {
        a += coeff / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// Gamma(x) for x > 0.5.
pub(crate) fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn erf_reference_values() {
        assert_relative_eq!(erf(0.5), 0.5204998778130465, max_relative = 1e-14);
        assert_relative_eq!(erf(1.0), 0.8427007929497149, max_relative = 1e-14);
        assert_relative_eq!(erfc(1.0), 0.15729920705028513, max_relative = 1e-13);
        assert_relative_eq!(erfc(2.0), 0.004677734981047266, max_relative = 1e-13);
        assert_relative_eq!(erfc(4.0), 1.541725790028002e-8, max_relative = 1e-12);
    }

    #[test]
    fn normal_tail_matches_reference() {
        // 2 * P(X > 6) for the standard normal
        assert_relative_eq!(2.0 * normal_tail(6.0), 1.973175290075389e-9, max_relative = 1e-10);
        assert_relative_eq!(2.0 * normal_tail(4.0), 6.334248366623973e-5, max_relative = 1e-12);
        assert_relative_eq!(normal_box_mass(6.0), 1.0 - 1.973175290075389e-9, max_relative = 1e-15);
    }

    #[test]
    fn gamma_reference_values() {
        assert_relative_eq!(gamma(1.0), 1.0, max_relative = 1e-12);
        assert_relative_eq!(gamma(1.5), 0.886226925452758, max_relative = 1e-12);
        assert_relative_eq!(gamma(5.0), 24.0, max_relative = 1e-12);
        // 2-D volume of the unit l_p ball, p = 1.5: 4*Gamma(1+1/p)^2/Gamma(1+2/p)
        let p: f64 = 1.5;
        let vol = 4.0 * gamma(1.0 + 1.0 / p).powi(2) / gamma(1.0 + 2.0 / p);
        assert_relative_eq!(vol, 2.737853623918903, max_relative = 1e-12);
    }
}
