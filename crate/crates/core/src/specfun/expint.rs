//! Generalized exponential integrals `E_n(x) = ∫_1^∞ t^{-n} e^{-xt} dt`.

use crate::error::{invalid, Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

/// `e^x E_n(x)` for `n ≥ 1`, `x ≥ 0`; finite for large `x` where `E_n` underflows.
pub fn scaled_exp_integral(n: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return invalid("exponential integral order must be >= 1");
    }
    if x.is_nan() || x < 0.0 {
        return invalid(format!("exponential integral argument must be >= 0, got {x}"));
    }
    if x == 0.0 {
        return if n == 1 {
            Ok(f64::INFINITY)
        } else {
            Ok(1.0 / (n - 1) as f64)
        };
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let nm1 = (n - 1) as f64;
    if x > 1.0 {
        // modified Lentz continued fraction
        let tiny = 1e-300;
        let mut b = x + n as f64;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITER {
            let an = -(i as f64) * (nm1 + i as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                return Ok(h);
            }
        }
        return Err(Error::Numerical(format!(
            "E_{n}({x}) continued fraction did not converge"
        )));
    }
    let mut ans = if n == 1 { -x.ln() - EULER_GAMMA } else { 1.0 / nm1 };
    let mut fact = 1.0;
    for i in 1..=MAX_ITER {
        fact *= -x / i as f64;
        let del = if (i as f64) != nm1 {
            -fact / (i as f64 - nm1)
        } else {
            let psi = -EULER_GAMMA + (1..=n - 1).map(|k| 1.0 / k as f64).sum::<f64>();
            fact * (-x.ln() + psi)
        };
        ans += del;
        if del.abs() < ans.abs() * EPS {
            return Ok(ans * x.exp());
        }
    }
    Err(Error::Numerical(format!("E_{n}({x}) series did not converge")))
}

/// `E_n(x)`.
pub fn exp_integral_en(n: u32, x: f64) -> Result<f64> {
    let s = scaled_exp_integral(n, x)?;
    Ok(if s.is_infinite() { s } else { s * (-x).exp() })
}

/// Exponential integral `E_1(x)` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return invalid(format!("E1 requires x > 0, got {x}"));
    }
    exp_integral_en(1, x)
}
