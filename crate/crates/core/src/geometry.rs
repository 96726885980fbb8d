//! Poisson network geometry seen from a typical user at the origin.
//!
//! Distances are in km, densities in ENs/km². Stream indices `ell` are
//! 1-based: `ell = 1` is the nearest edge node.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::specfun::ln_gamma;

/// Scalar system and propagation parameters.
///
/// `beta_intercept`, `tx_power` and `noise_power` are carried for
/// completeness; in the interference-limited regime they cancel out of every
/// SIR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub lambda_density: f64,
    pub eta: f64,
    pub n_r: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub area_radius_km: f64,
    pub beta_intercept: f64,
    pub tx_power: f64,
    pub noise_power: f64,
    pub bandwidth_w: f64,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            lambda_density: 8.0,
            eta: 3.75,
            n_r: 8,
            l: 4,
            area_radius_km: 3.0,
            beta_intercept: 1.0,
            tx_power: 1.0,
            noise_power: 0.0,
            bandwidth_w: 10e6,
            seed: 1,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_density > 0.0 && self.lambda_density.is_finite()) {
            return invalid(format!("lambda_density must be positive, got {}", self.lambda_density));
        }
        if !(self.eta > 2.0 && self.eta.is_finite()) {
            return invalid(format!("eta must exceed 2, got {}", self.eta));
        }
        if self.l == 0 || self.l > self.n_r {
            return invalid(format!("need 1 <= L <= n_r, got L={}, n_r={}", self.l, self.n_r));
        }
        if !(self.area_radius_km > 0.0 && self.area_radius_km.is_finite()) {
            return invalid(format!("area_radius_km must be positive, got {}", self.area_radius_km));
        }
        if !(self.bandwidth_w > 0.0) {
            return invalid(format!("bandwidth_w must be positive, got {}", self.bandwidth_w));
        }
        Ok(())
    }

    pub fn mean_point_count(&self) -> f64 {
        self.lambda_density * PI * self.area_radius_km * self.area_radius_km
    }
}

/// One PPP realization with points ordered by distance from the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkGeometry {
    pub points: Vec<[f64; 2]>,
    pub sorted_distances: Vec<f64>,
}

impl NetworkGeometry {
    /// Builds a geometry from arbitrary points, sorting them by distance.
    pub fn from_points(mut points: Vec<[f64; 2]>) -> Self {
        points.sort_by(|a, b| a[0].hypot(a[1]).total_cmp(&b[0].hypot(b[1])));
        let sorted_distances = points.iter().map(|p| p[0].hypot(p[1])).collect();
        Self { points, sorted_distances }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance of the `ell`-th nearest node (1-based).
    pub fn distance(&self, ell: usize) -> f64 {
        self.sorted_distances[ell - 1]
    }

    /// `Σ_{j > L} r_j^{-η}`.
    pub fn interference_beyond(&self, l: usize, eta: f64) -> f64 {
        self.sorted_distances.iter().skip(l).fold(0.0, |acc, r| acc + r.powf(-eta))
    }
}

/// Homogeneous PPP of density `λ` on the disk of radius `area_radius_km`.
pub fn sample_ppp<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> NetworkGeometry {
    let mean = config.mean_point_count();
    let count = if mean > 0.0 {
        Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0)
    } else {
        0
    };
    let radius = config.area_radius_km;
    let points = (0..count)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let theta = 2.0 * PI * rng.random::<f64>();
            [r * theta.cos(), r * theta.sin()]
        })
        .collect();
    NetworkGeometry::from_points(points)
}

/// Resamples until at least `min_points` nodes are present; returns the
/// geometry and the number of rejected draws.
pub fn sample_ppp_at_least<R: Rng + ?Sized>(
    config: &SystemConfig,
    min_points: usize,
    rng: &mut R,
) -> Result<(NetworkGeometry, u64)> {
    if (min_points as f64) > 10.0 * config.mean_point_count() + 50.0 {
        return invalid(format!(
            "{min_points} points requested but the disk holds {:.1} on average",
            config.mean_point_count()
        ));
    }
    let mut rejected = 0;
    loop {
        let g = sample_ppp(config, rng);
        if g.len() >= min_points {
            return Ok((g, rejected));
        }
        rejected += 1;
    }
}

/// PDF of the distance to the `n`-th nearest point of a PPP of density `λ`.
pub fn distance_pdf(n: usize, lambda: f64, v: f64) -> f64 {
    if n == 0 || v <= 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    let a = PI * lambda;
    let ln = 2f64.ln() + nf * a.ln() - ln_gamma(nf) + (2.0 * nf - 1.0) * v.ln() - a * v * v;
    ln.exp()
}

/// Joint PDF of `(r_ell, r_n)` for `ell < n`; zero outside `0 <= u <= v`.
pub fn joint_distance_pdf(ell: usize, n: usize, lambda: f64, u: f64, v: f64) -> Result<f64> {
    if ell == 0 || ell >= n {
        return invalid(format!("joint distance PDF needs 1 <= ell < n, got ell={ell}, n={n}"));
    }
    if u <= 0.0 || v <= 0.0 || u > v {
        return Ok(0.0);
    }
    let (lf, nf) = (ell as f64, n as f64);
    let a = PI * lambda;
    let gap = v * v - u * u;
    if gap <= 0.0 && n - ell - 1 > 0 {
        return Ok(0.0);
    }
    let gap_term = if n - ell - 1 == 0 { 0.0 } else { (nf - lf - 1.0) * gap.ln() };
    let ln = 4f64.ln() + nf * a.ln() - ln_gamma(nf - lf) - ln_gamma(lf) + gap_term + v.ln()
        + (2.0 * lf - 1.0) * u.ln()
        - a * v * v;
    Ok(ln.exp())
}

/// Campbell mean of `Σ_{j>L} r_j^{-η}` given `r_L`: `2πλ/(η-2) · r_L^{2-η}`.
pub fn expected_interference(lambda: f64, eta: f64, r_l: f64) -> Result<f64> {
    if !(eta > 2.0) {
        return invalid(format!("mean interference diverges for eta <= 2 (eta={eta})"));
    }
    if !(r_l > 0.0) {
        return invalid(format!("r_L must be positive, got {r_l}"));
    }
    if !(lambda > 0.0) {
        return invalid(format!("lambda must be positive, got {lambda}"));
    }
    Ok(2.0 * PI * lambda / (eta - 2.0) * r_l.powf(2.0 - eta))
}

/// `ρ_ℓ = r_ℓ^{-η} / Σ_{j>L} r_j^{-η}`; infinite when nothing lies beyond `L`.
pub fn local_avg_sir_exact(geom: &NetworkGeometry, ell: usize, l: usize, eta: f64) -> Result<f64> {
    if ell == 0 || ell > l {
        return invalid(format!("need 1 <= ell <= L, got ell={ell}, L={l}"));
    }
    if geom.len() < l {
        return invalid(format!("geometry has {} points, L={l} needed", geom.len()));
    }
    let interference = geom.interference_beyond(l, eta);
    Ok(geom.distance(ell).powf(-eta) / interference)
}

/// `ρ̃_ℓ = r_L^{η-2} / r_ℓ^η · (η-2)/(2πλ)`.
pub fn local_avg_sir_approx(r_ell: f64, r_l: f64, lambda: f64, eta: f64) -> Result<f64> {
    if !(r_ell > 0.0) || r_ell > r_l {
        return invalid(format!("need 0 < r_ell <= r_L, got r_ell={r_ell}, r_L={r_l}"));
    }
    Ok(r_ell.powf(-eta) / expected_interference(lambda, eta, r_l)?)
}

/// `ρ̃_1, …, ρ̃_L` for one geometry.
pub fn local_avg_sirs_approx(geom: &NetworkGeometry, l: usize, lambda: f64, eta: f64) -> Result<Vec<f64>> {
    if geom.len() < l || l == 0 {
        return invalid(format!("geometry has {} points, L={l} needed", geom.len()));
    }
    let r_l = geom.distance(l);
    (1..=l)
        .map(|ell| local_avg_sir_approx(geom.distance(ell), r_l, lambda, eta))
        .collect()
}

/// Distances of a PPP restricted to the annulus `r_inner < r <= r_outer`.
///
/// Given `r_L`, the points beyond it form exactly such a process, which is
/// how the conditional interference is sampled.
pub fn sample_annulus_distances<R: Rng + ?Sized>(
    lambda: f64,
    r_inner: f64,
    r_outer: f64,
    rng: &mut R,
) -> Vec<f64> {
    let area = PI * (r_outer * r_outer - r_inner * r_inner);
    let count = Poisson::new(lambda * area).map(|p| p.sample(rng) as usize).unwrap_or(0);
    let (a2, b2) = (r_inner * r_inner, r_outer * r_outer);
    (0..count)
        .map(|_| (a2 + (b2 - a2) * rng.random::<f64>()).sqrt())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_to_infinity, QuadOptions};
    use crate::stats::ks_statistic;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mean_point_count() {
        let cfg = SystemConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 4000;
        let total: usize = (0..n).map(|_| sample_ppp(&cfg, &mut rng).len()).sum();
        let mean = total as f64 / n as f64;
        let expected = 72.0 * PI;
        // Poisson sd / sqrt(n) ≈ 0.24
        assert!((mean - expected).abs() < 1.0, "{mean}");
    }

    #[test]
    fn tiny_disk_is_empty() {
        let cfg = SystemConfig {
            area_radius_km: 1e-6,
            ..SystemConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!((0..1000).all(|_| sample_ppp(&cfg, &mut rng).is_empty()));
    }

    #[test]
    fn sorted_and_positive() {
        let cfg = SystemConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g = sample_ppp(&cfg, &mut rng);
            assert!(g.sorted_distances.windows(2).all(|w| w[0] <= w[1]));
            assert!(g.sorted_distances.iter().all(|&r| r > 0.0 && r <= 3.0));
            if g.len() > 4 {
                let rho = local_avg_sirs_approx(&g, 4, 8.0, 3.75).unwrap();
                assert!(rho.windows(2).all(|w| w[0] >= w[1]));
                let exact: Vec<f64> = (1..=4).map(|l| local_avg_sir_exact(&g, l, 4, 3.75).unwrap()).collect();
                assert!(exact.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn nearest_distance_law() {
        let cfg = SystemConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r1: Vec<f64> = (0..20_000)
            .map(|_| sample_ppp_at_least(&cfg, 1, &mut rng).unwrap().0.distance(1))
            .collect();
        let a = PI * cfg.lambda_density;
        let d = ks_statistic(&r1, |v| 1.0 - (-a * v * v).exp());
        assert!(d < 0.012, "KS {d}");
    }

    #[test]
    fn pdf_normalization_and_mode() {
        for &(n, lambda) in &[(1usize, 8.0), (3, 1.0), (4, 8.0), (16, 8.0)] {
            let q = integrate_to_infinity(|v| distance_pdf(n, lambda, v), 0.0, QuadOptions::new(1e-13, 1e-13))
                .unwrap()
                .value;
            assert!((q - 1.0).abs() < 1e-10, "n={n}: {q}");
        }
        let lambda = 2.0;
        let mode = 1.0 / (2.0 * PI * lambda).sqrt();
        let f = |v: f64| distance_pdf(1, lambda, v);
        assert!(f(mode) > f(mode * 0.999) && f(mode) > f(mode * 1.001));
    }

    #[test]
    fn joint_pdf_marginal_and_support() {
        let lambda = 8.0;
        assert_eq!(joint_distance_pdf(1, 4, lambda, 0.5, 0.4).unwrap(), 0.0);
        assert!(joint_distance_pdf(4, 4, lambda, 0.1, 0.4).is_err());
        for &(ell, n) in &[(1usize, 2usize), (1, 4), (2, 4), (3, 7)] {
            for &v in &[0.1, 0.3, 0.55] {
                let m = integrate(
                    |u| joint_distance_pdf(ell, n, lambda, u, v).unwrap(),
                    0.0,
                    v,
                    QuadOptions::new(1e-14, 1e-13),
                )
                .unwrap()
                .value;
                assert!((m - distance_pdf(n, lambda, v)).abs() < 1e-8, "({ell},{n}) v={v}");
            }
        }
        let total = integrate_to_infinity(
            |v| {
                integrate(
                    |u| joint_distance_pdf(1, 4, lambda, u, v).unwrap(),
                    0.0,
                    v,
                    QuadOptions::new(1e-14, 1e-13),
                )
                .unwrap()
                .value
            },
            0.0,
            QuadOptions::new(1e-12, 1e-12),
        )
        .unwrap()
        .value;
        assert!((total - 1.0).abs() < 1e-8, "{total}");
    }

    #[test]
    fn campbell_examples() {
        assert!((expected_interference(1.0 / PI, 4.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let a = expected_interference(3.0, 3.5, 0.7).unwrap();
        let b = expected_interference(6.0, 3.5, 0.7).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12 * b);
        assert!(expected_interference(1.0, 2.0, 1.0).is_err());
        assert!((local_avg_sir_approx(1.0, 1.0, 1.0 / PI, 4.0).unwrap() - 1.0).abs() < 1e-15);
        let r = local_avg_sir_approx(0.3, 0.5, 8.0, 3.75).unwrap();
        let d = 0.3f64.powf(-3.75) / expected_interference(8.0, 3.75, 0.5).unwrap();
        assert!((r - d).abs() < 1e-12 * d);
        assert!(local_avg_sir_approx(0.6, 0.5, 8.0, 3.75).is_err());
    }

    #[test]
    fn exact_sir_single_interferer() {
        let g = NetworkGeometry::from_points(vec![[0.0, 0.5], [0.5, 0.0]]);
        assert!((local_avg_sir_exact(&g, 1, 1, 3.75).unwrap() - 1.0).abs() < 1e-15);
        let lone = NetworkGeometry::from_points(vec![[0.2, 0.0]]);
        assert!(local_avg_sir_exact(&lone, 1, 1, 3.0).unwrap().is_infinite());
    }

    #[test]
    fn geometry_json_roundtrip() {
        let g = NetworkGeometry::from_points(vec![[0.3, -0.1], [0.05, 0.02]]);
        let s = serde_json::to_string(&g).unwrap();
        let back: NetworkGeometry = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(back.distance(1) < back.distance(2));
    }
}
