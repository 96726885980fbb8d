//! Monte Carlo physical layer: Rayleigh channels, partial zero-forcing with
//! and without successive cancellation, ergodic rates and outage.
//!
//! Stream indices `ell` and decoding orders are 1-based, matching the
//! distance ordering of [`crate::geometry::NetworkGeometry`].

mod rates;
mod theorem;

pub use rates::{
    average_stream_rates_mc, ergodic_rate_mc, ergodic_rates_mc, geometry_trial, outage_curve_mc,
    outage_mc, qlb_rate, qlb_rate_sic, GeometryTrial, OutageCurve, OutageEstimate, StreamRateEstimate,
};
pub use theorem::{
    best_order_brute_force, verify_sic_order_theorem, Counterexample, FamilyKind, TheoremReport,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// Largest tolerated ratio between the extreme diagonal entries of the QR factor.
pub const CONDITION_GUARD: f64 = 1e12;

pub type ChannelMatrix = DMatrix<Complex64>;

/// `n_r x cols` matrix of i.i.d. CN(0, 1) entries.
pub fn sample_channel<R: Rng + ?Sized>(n_r: usize, cols: usize, rng: &mut R) -> ChannelMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(n_r, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

/// Columns of the pseudo-inverse `H (H^H H)^{-1}` computed through a thin QR.
fn pseudo_inverse_columns(h: &ChannelMatrix) -> Result<ChannelMatrix> {
    let (rows, cols) = h.shape();
    if cols == 0 || rows < cols {
        return invalid(format!("zero-forcing needs n_r >= streams, got {rows} x {cols}"));
    }
    let qr = h.clone().qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..cols).map(|i| r[(i, i)].norm()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) || max / min > CONDITION_GUARD {
        return Err(Error::Numerical(format!(
            "channel submatrix is rank deficient (condition estimate {:.3e})",
            max / min
        )));
    }
    let r_inv_h = r
        .adjoint()
        .solve_lower_triangular(&DMatrix::identity(cols, cols))
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    Ok(qr.q() * r_inv_h)
}

/// Unit-norm receive filters and their useful gains `‖h‡‖^{-2}`.
#[derive(Debug, Clone)]
pub struct ZfFilters {
    pub filters: Vec<DVector<Complex64>>,
    pub useful_gain: Vec<f64>,
}

/// PZF filters for the first `l` columns of `h`.
pub fn pzf_filters(h: &ChannelMatrix, l: usize) -> Result<ZfFilters> {
    if l == 0 || l > h.ncols() {
        return invalid(format!("need 1 <= L <= {} columns, got L={l}", h.ncols()));
    }
    let pinv = pseudo_inverse_columns(&h.columns(0, l).into_owned())?;
    let mut filters = Vec::with_capacity(l);
    let mut useful_gain = Vec::with_capacity(l);
    for c in pinv.column_iter() {
        let n2 = c.norm_squared();
        filters.push(c.into_owned() / Complex64::new(n2.sqrt(), 0.0));
        useful_gain.push(1.0 / n2);
    }
    Ok(ZfFilters { filters, useful_gain })
}

fn check_order(order: &[usize], l: usize) -> Result<()> {
    let mut seen = vec![false; l + 1];
    if order.len() != l {
        return invalid(format!("decoding order has {} entries, L={l}", order.len()));
    }
    for &o in order {
        if o == 0 || o > l || seen[o] {
            return invalid(format!("{order:?} is not a permutation of 1..={l}"));
        }
        seen[o] = true;
    }
    Ok(())
}

/// Filter and useful gain of SIC stage `ell` under decoding order `order`:
/// streams `order[..ell-1]` are already cancelled, `order[ell-1..]` remain and
/// the filter nulls all remaining ones except `order[ell-1]`.
pub fn sic_stage_filter(h: &ChannelMatrix, order: &[usize], ell: usize) -> Result<(DVector<Complex64>, f64)> {
    let l = order.len();
    check_order(order, l)?;
    if ell == 0 || ell > l {
        return invalid(format!("need 1 <= ell <= L, got ell={ell}, L={l}"));
    }
    let remaining: Vec<usize> = order[ell - 1..].iter().map(|&o| o - 1).collect();
    let hs = h.select_columns(remaining.iter());
    let pinv = pseudo_inverse_columns(&hs)?;
    let c = pinv.column(0);
    let n2 = c.norm_squared();
    Ok((c.into_owned() / Complex64::new(n2.sqrt(), 0.0), 1.0 / n2))
}

fn interference(filter: &DVector<Complex64>, h: &ChannelMatrix, distances: &[f64], l: usize, eta: f64) -> f64 {
    // fold from +0.0 so an empty interferer set yields +inf SIR, not -inf
    (l..distances.len()).fold(0.0, |acc, j| {
        acc + distances[j].powf(-eta) * filter.dotc(&h.column(j)).norm_sqr()
    })
}

fn check_sir_inputs(h: &ChannelMatrix, distances: &[f64], ell: usize, l: usize) -> Result<()> {
    if h.ncols() != distances.len() {
        return invalid(format!(
            "channel has {} columns but {} distances were given",
            h.ncols(),
            distances.len()
        ));
    }
    if ell == 0 || ell > l || l > distances.len() {
        return invalid(format!(
            "need 1 <= ell <= L <= {} nodes, got ell={ell}, L={l}",
            distances.len()
        ));
    }
    Ok(())
}

/// PZF SIR of stream `ell`; `+inf` when no node lies beyond the `L` decoded ones.
pub fn pzf_stream_sir(h: &ChannelMatrix, distances: &[f64], ell: usize, l: usize, eta: f64) -> Result<f64> {
    check_sir_inputs(h, distances, ell, l)?;
    let f = pzf_filters(h, l)?;
    let q = &f.filters[ell - 1];
    let signal = distances[ell - 1].powf(-eta) * f.useful_gain[ell - 1];
    Ok(signal / interference(q, h, distances, l, eta))
}

/// SIR of SIC stage `ell` (genie-aided cancellation of earlier stages).
pub fn sic_stream_sir(
    h: &ChannelMatrix,
    distances: &[f64],
    order: &[usize],
    ell: usize,
    l: usize,
    eta: f64,
) -> Result<f64> {
    check_sir_inputs(h, distances, ell, l)?;
    if order.len() != l {
        return invalid(format!("decoding order has {} entries, L={l}", order.len()));
    }
    let (q, gain) = sic_stage_filter(h, order, ell)?;
    let stream = order[ell - 1];
    let signal = distances[stream - 1].powf(-eta) * gain;
    Ok(signal / interference(&q, h, distances, l, eta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_channel_gives_standard_basis() {
        let h = DMatrix::from_fn(2, 2, |i, j| c(if i == j { 1.0 } else { 0.0 }));
        let f = pzf_filters(&h, 2).unwrap();
        for (k, q) in f.filters.iter().enumerate() {
            for i in 0..2 {
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((q[i].norm() - want).abs() < 1e-14);
            }
            assert!((f.useful_gain[k] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn single_stream_gain_is_norm_squared() {
        let h = DMatrix::from_column_slice(2, 1, &[c(3.0), c(4.0)]);
        let f = pzf_filters(&h, 1).unwrap();
        assert!((f.useful_gain[0] - 25.0).abs() < 1e-12);
    }

    #[test]
    fn nulls_other_decoded_streams() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(n_r, l) in &[(8, 4), (8, 8), (16, 6), (3, 1)] {
            let h = sample_channel(n_r, l + 3, &mut rng);
            let f = pzf_filters(&h, l).unwrap();
            for (k, q) in f.filters.iter().enumerate() {
                assert!((q.norm() - 1.0).abs() < 1e-12);
                for j in 0..l {
                    let ip = q.dotc(&h.column(j)).norm();
                    if j == k {
                        assert!((ip * ip - f.useful_gain[k]).abs() < 1e-9 * f.useful_gain[k]);
                    } else {
                        assert!(ip <= 1e-10 * h.column(j).norm(), "leak {ip}");
                    }
                }
            }
        }
    }

    #[test]
    fn rank_deficient_is_reported() {
        let col = [c(1.0), c(2.0), c(-1.0)];
        let h = DMatrix::from_fn(3, 2, |i, _| col[i]);
        assert!(matches!(pzf_filters(&h, 2), Err(Error::Numerical(_))));
    }

    #[test]
    fn sic_first_stage_is_pzf() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = sample_channel(6, 9, &mut rng);
        let d: Vec<f64> = (1..=9).map(|i| 0.1 * i as f64).collect();
        for ell in 1..=4 {
            let mut order = vec![ell];
            order.extend((1..=4).filter(|&o| o != ell));
            let sic = sic_stream_sir(&h, &d, &order, 1, 4, 3.75).unwrap();
            let pzf = pzf_stream_sir(&h, &d, ell, 4, 3.75).unwrap();
            assert!((sic - pzf).abs() < 1e-10 * pzf);
        }
        assert!(sic_stream_sir(&h, &d, &[1, 1, 2, 3], 1, 4, 3.75).is_err());
    }

    #[test]
    fn sic_last_stage_is_matched_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = sample_channel(5, 3, &mut rng);
        let (_, g) = sic_stage_filter(&h, &[2, 3, 1], 3).unwrap();
        assert!((g - h.column(0).norm_squared()).abs() < 1e-12 * g);
    }

    #[test]
    fn no_interferers_means_infinite_sir() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = sample_channel(4, 2, &mut rng);
        assert!(pzf_stream_sir(&h, &[0.2, 0.4], 2, 2, 3.0).unwrap().is_infinite());
    }

    #[test]
    fn orthonormal_single_interferer_shape() {
        // n_r = 2, stream 1 along e1, interferer along e1 as well: |q^H h|^2 = 1
        let h = DMatrix::from_fn(2, 2, |i, _| c(if i == 0 { 1.0 } else { 0.0 }));
        let (r1, r2, eta) = (0.3, 0.9, 4.0);
        let sir = pzf_stream_sir(&h, &[r1, r2], 1, 1, eta).unwrap();
        assert!((sir - (r1 / r2).powf(-eta)).abs() < 1e-9 * sir);
    }
}
