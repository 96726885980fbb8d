//! Gauss hypergeometric function `₂F₁(a, b; c; z)` on the cut plane `Re z < 1`.
//!
//! Evaluation routes:
//!
//! * `Re z < 0`: Pfaff map `w = z / (z - 1)`; the transformed series is used
//!   while `|w| ≤ 0.75`, picking the Pfaff form whose coefficients do not
//!   alternate in sign.
//! * `0 ≤ Re z < 1`, small `|z|`: the defining series.
//! * everything else: the Euler integral
//!   `Γ(c)/(Γ(p)Γ(c-p)) ∫_0^1 t^{p-1}(1-t)^{c-p-1}(1-zt)^{-q} dt`
//!   with `p ∈ {b, a}` chosen so that `0 < p < c`, integrated with a
//!   logarithmic substitution near `t = 0` so that large `|z|` stays cheap.

use num_complex::Complex64;

use super::gamma::ln_gamma;
use crate::error::{Error, Result};
use crate::quad::{integrate_complex, QuadOptions};

const PFAFF_RADIUS: f64 = 0.75;
const MAX_TERMS: usize = 50_000;

fn is_non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// `₂F₁(a, b; c; z)` for real parameters and complex `z` with `Re z < 1`.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "2F1 parameters must be finite (a={a}, b={b}, c={c})"
        )));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("2F1 argument must be finite, got {z}")));
    }
    if is_non_positive_integer(c) {
        return Err(Error::UnsupportedDomain(format!(
            "2F1 with c = {c} (non-positive integer) is not supported"
        )));
    }
    if z.re >= 1.0 {
        return Err(Error::UnsupportedDomain(format!(
            "2F1 is only supported for Re z < 1, got z = {z}"
        )));
    }
    if z == Complex64::new(0.0, 0.0) || a == 0.0 || b == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if is_non_positive_integer(a) || is_non_positive_integer(b) {
        return series(a, b, c, z);
    }

    if z.re < 0.0 {
        let w = z / (z - 1.0);
        if w.norm() <= PFAFF_RADIUS {
            return pfaff(a, b, c, z, w);
        }
        return euler_integral(a, b, c, z);
    }

    let series_limit = if a > 0.0 && b > 0.0 { PFAFF_RADIUS } else { 0.25 };
    if z.norm() <= series_limit {
        return series(a, b, c, z);
    }
    match euler_integral(a, b, c, z) {
        Err(Error::UnsupportedDomain(_)) if z.norm() <= 0.9 => series(a, b, c, z),
        other => other,
    }
}

/// Real-argument convenience wrapper (`z < 1`).
pub fn hyp2f1_real(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    Ok(hyp2f1(a, b, c, Complex64::new(z, 0.0))?.re)
}

/// Partial sums of the defining series until the terms are negligible.
fn series(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut small_run = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= z * ((a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)));
        sum += term;
        if term.norm() == 0.0 {
            return Ok(sum);
        }
        if term.norm() <= 1e-17 * sum.norm() {
            small_run += 1;
            if small_run >= 2 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::Numerical(format!(
        "2F1({a}, {b}; {c}; {z}) series did not converge in {MAX_TERMS} terms"
    )))
}

fn pfaff(a: f64, b: f64, c: f64, z: Complex64, w: Complex64) -> Result<Complex64> {
    // form A: (1-z)^{-a} F(a, c-b; c; w);  form B: (1-z)^{-b} F(c-a, b; c; w)
    let positive = |p: f64, q: f64| p >= 0.0 && q >= 0.0;
    let a_ok = positive(a, c - b);
    let b_ok = positive(c - a, b);
    let use_a = match (a_ok, b_ok) {
        (true, false) => true,
        (false, true) => false,
        _ => a <= b,
    };
    let log1mz = (1.0 - z).ln();
    if use_a {
        Ok((-a * log1mz).exp() * series(a, c - b, c, w)?)
    } else {
        Ok((-b * log1mz).exp() * series(c - a, b, c, w)?)
    }
}

fn euler_integral(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    let (p, q) = if b > 0.0 && b < c {
        (b, a)
    } else if a > 0.0 && a < c {
        (a, b)
    } else {
        return Err(Error::UnsupportedDomain(format!(
            "2F1({a}, {b}; {c}; {z}): Euler integral needs 0 < b < c or 0 < a < c"
        )));
    };
    let r = c - p;
    let prefactor = (ln_gamma(c) - ln_gamma(p) - ln_gamma(r)).exp();
    let kernel = |t: f64| -> Complex64 { (-q * (1.0 - z * t).ln()).exp() };

    // t in [1/2, 1]: u = (1-t)^r
    let right = |u: f64| -> Complex64 {
        let t = 1.0 - u.powf(1.0 / r);
        kernel(t) * (t.powf(p - 1.0) / r)
    };
    let u_max = 0.5f64.powf(r);
    // t in (0, 1/2]: t = e^{-s}, s = ln 2 + v / (1 - v)
    let ln2 = std::f64::consts::LN_2;
    let left = |v: f64| -> Complex64 {
        let one_minus = 1.0 - v;
        let s = ln2 + v / one_minus;
        let t = (-s).exp();
        let weight = (-p * s).exp() * (-(-s).exp_m1()).powf(r - 1.0) / (one_minus * one_minus);
        if weight == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            kernel(t) * weight
        }
    };

    let coarse = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-6,
        max_intervals: 400,
    };
    let scale = integrate_complex(right, 0.0, u_max, coarse)?.value.norm()
        + integrate_complex(left, 0.0, 1.0, coarse)?.value.norm();
    let fine = QuadOptions {
        abs_tol: 1e-15 * scale,
        rel_tol: 1e-14,
        max_intervals: 4000,
    };
    let total = integrate_complex(right, 0.0, u_max, fine)?.value
        + integrate_complex(left, 0.0, 1.0, fine)?.value;
    Ok(total * prefactor)
}
