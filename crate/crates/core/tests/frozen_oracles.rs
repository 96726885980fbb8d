//! Reference values computed offline at 30 digits with mpmath. They use the
//! factorization `1/ρ̃ = c·Y·B^{η/2}` with `Y ~ Gamma(L)`, `B ~ Beta(ℓ, L-ℓ)`
//! and `c = 2/(η-2)` (distances rescaled so that `πλ = 1`), which reduces the
//! Laplace transform and the CDFs to one-dimensional integrals over `B`.

use cachecast::analysis::{avg_rate_stream, avg_rate_stream_dof, cdf_sir_tilde_dof, laplace_inv_rho};
use num_complex::Complex64;

#[test]
fn laplace_reference_values() {
    let cases = [
        (Complex64::new(2.0, 0.0), 1, 3, 3.75, Complex64::new(0.540312710045967, 0.0)),
        (Complex64::new(2.0, 3.0), 2, 5, 3.0, Complex64::new(0.0292648936474838, -0.0607078297873444)),
        (Complex64::new(0.5, 0.0), 3, 4, 4.5, Complex64::new(0.476650751364921, 0.0)),
    ];
    for (s, ell, l, eta, want) in cases {
        let got = laplace_inv_rho(s, ell, l, eta).unwrap();
        assert!((got - want).norm() < 1e-12, "s={s} ell={ell} L={l}: {got} vs {want}");
    }
}

#[test]
fn sir_cdf_reference_values() {
    let cases = [
        (1.0, 2, 4, 5, 3.75, 0.0706436573223030),
        (10.0, 1, 4, 5, 3.75, 0.326591440653182),
        (0.2, 3, 6, 3, 3.2, 0.0584836270185013),
        (1.0, 4, 4, 5, 3.75, 0.438289105685109),
    ];
    for (g, ell, l, dof, eta, want) in cases {
        let got = cdf_sir_tilde_dof(g, ell, l, dof, eta).unwrap();
        assert!((got - want).abs() < 1e-12, "γ={g} ell={ell} L={l}: {got} vs {want}");
    }
}

#[test]
fn average_rate_reference_values() {
    let cases = [(1, 5.27809371547671), (2, 2.81568112262618), (4, 1.17194131982315)];
    for (ell, want) in cases {
        let got = avg_rate_stream(ell, 4, 8, 3.75).unwrap();
        assert!((got - want).abs() < 1e-8, "ell={ell}: {got} vs {want}");
    }
    assert_eq!(avg_rate_stream_dof(4, 4, 5, 3.75).unwrap(), avg_rate_stream(4, 4, 8, 3.75).unwrap());
}

#[test]
fn parity_matrix_l2_ne5() {
    // independent GF(2^8) arithmetic (poly 0x11D) in Python
    let p = cachecast::coded_caching::mds::parity_matrix(2, 5).unwrap();
    assert_eq!(p, vec![vec![0x01, 0x01], vec![0x01, 0x46], vec![0x01, 0xf5]]);
}
