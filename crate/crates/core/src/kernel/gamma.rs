use crate::error::{invalid, Result};

const MAX_ITER: usize = 10_000;
const EPS: f64 = 1e-17;

/// Lanczos approximation (g = 7, n = 9) of ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
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
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma function `P(s, x) = γ(s, x) / Γ(s)`.
///
/// Power series for `x < s + 1`, Lentz continued fraction for the upper
/// complement otherwise.
pub fn regularized_lower_gamma(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(invalid(format!("gamma shape must be positive, got {s}")));
    }
    if !(x >= 0.0) {
        return Err(invalid(format!("gamma argument must be nonnegative, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let log_prefactor = s * x.ln() - x - ln_gamma(s);
    let p = if x < s + 1.0 {
        lower_series(s, x, log_prefactor)
    } else {
        1.0 - upper_continued_fraction(s, x, log_prefactor)
    };
    Ok(p.clamp(0.0, 1.0))
}

fn lower_series(s: f64, x: f64, log_prefactor: f64) -> f64 {
    let mut denom = s;
    let mut term = 1.0 / s;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * log_prefactor.exp()
}

fn upper_continued_fraction(s: f64, x: f64, log_prefactor: f64) -> f64 {
    let tiny = f64::MIN_POSITIVE / EPS;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    log_prefactor.exp() * h
}
