//! Student-t distribution: upper tail through the regularized incomplete beta
//! function, and its inverse.
//!
//! The quantile is found by Newton iteration on the upper tail, safeguarded by
//! a bisection bracket: `[0, hi]` with `hi` doubled until the tail falls below
//! the target. Newton steps that leave the bracket are replaced by bisection.
//! Iteration stops when the step falls below `1e-14 * max(1, t)`.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection.
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let t = x + LANCZOS_G + 0.5;
        let series = LANCZOS[1..]
            .iter()
            .enumerate()
            .fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0));
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
    }
}

/// Stirling remainder `ln Γ(z) - [(z - 1/2) ln z - z + ln √(2π)]` for large `z`.
fn stirling_tail(z: f64) -> f64 {
    let z2 = z * z;
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z
}

/// `ln Γ(a + b) - ln Γ(a)`, accurate when `a` is large and `b` small.
fn ln_gamma_ratio(a: f64, b: f64) -> f64 {
    if a < 50.0 {
        return ln_gamma(a + b) - ln_gamma(a);
    }
    (a - 0.5) * (b / a).ln_1p() + b * (a + b).ln() - b + stirling_tail(a + b) - stirling_tail(a)
}

fn ln_beta(a: f64, b: f64) -> f64 {
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    ln_gamma(small) - ln_gamma_ratio(big, small)
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 100_000;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)` given both `x` and `y = 1 - x`,
/// so callers can supply a complement computed without cancellation.
fn beta_reg(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * y.ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_fraction(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_fraction(b, a, y) / b
    }
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_beta(a: f64, b: f64, x: f64) -> f64 {
    beta_reg(a, b, x, 1.0 - x)
}

/// `P(T > t)` for `t >= 0`.
fn upper_tail(t: f64, nu: f64) -> f64 {
    let t2 = t * t;
    let denom = nu + t2;
    0.5 * beta_reg(0.5 * nu, 0.5, nu / denom, t2 / denom)
}

/// Cumulative distribution function of Student's t with `nu` degrees of freedom.
pub fn t_cdf(t: f64, nu: f64) -> f64 {
    if t >= 0.0 {
        1.0 - upper_tail(t, nu)
    } else {
        upper_tail(-t, nu)
    }
}

/// Density of Student's t with `nu` degrees of freedom.
pub fn t_pdf(t: f64, nu: f64) -> f64 {
    let ln_norm = ln_gamma_ratio(0.5 * nu, 0.5) - 0.5 * (nu * PI).ln();
    (ln_norm - 0.5 * (nu + 1.0) * (t * t / nu).ln_1p()).exp()
}

/// Quantile of Student's t: the `t` with `t_cdf(t, nu) = p`.
pub fn t_quantile(p: f64, nu: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", format!("{p} is outside (0, 1)")));
    }
    if nu.is_nan() || nu < 1.0 || nu.is_infinite() {
        return Err(invalid("nu", format!("degrees of freedom {nu} must be at least 1")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let (tail, sign) = if p > 0.5 { (1.0 - p, 1.0) } else { (p, -1.0) };
    Ok(sign * upper_quantile(tail, nu))
}

/// Solves `upper_tail(t) = q` for `0 < q < 1/2`.
fn upper_quantile(q: f64, nu: f64) -> f64 {
    let excess = |t: f64| upper_tail(t, nu) - q;

    let mut lo = 0.0;
    let mut hi = 1.0;
    while excess(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }

    let mut t = 0.5 * (lo + hi);
    for _ in 0..500 {
        let g = excess(t);
        if g == 0.0 {
            return t;
        }
        if g > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t + g / t_pdf(t, nu);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - t).abs();
        t = next;
        if step <= 1e-14 * t.max(1.0) || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    t
}
