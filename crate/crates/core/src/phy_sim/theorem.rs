//! Brute-force check that decoding the strongest stream first maximizes the
//! weakest SIC stage.
//!
//! Given functions `f_1 <= f_2 <= … <= f_L` (pointwise), each non-decreasing,
//! and inputs `x_1 >= … >= x_L`, the identity assignment should maximize
//! `min_ℓ f_ℓ(x_{π(ℓ)})` over all permutations `π`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::qlb_rate_sic;
use crate::error::{invalid, Result};

pub const MAX_BRUTE_FORCE_L: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    /// Cumulative sums of random non-negative increasing increments.
    Random,
    /// Random family with repeated functions and repeated inputs.
    Ties,
    /// Functions constant in `x`.
    Constant,
    /// The SIC quasi-lower-bound rates for a random antenna count.
    QlbSic,
}

const KINDS: [FamilyKind; 4] = [
    FamilyKind::Random,
    FamilyKind::Ties,
    FamilyKind::Constant,
    FamilyKind::QlbSic,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub kind: FamilyKind,
    pub x: Vec<f64>,
    /// `table[ℓ-1][i-1] = f_ℓ(x_i)`.
    pub table: Vec<Vec<f64>>,
    pub identity_value: f64,
    pub best_value: f64,
    pub best_order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub l: usize,
    pub instances: u64,
    pub per_family: Vec<(FamilyKind, u64)>,
    pub counterexamples: Vec<Counterexample>,
}

impl TheoremReport {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("pivot exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Best assignment for a table `table[ℓ-1][i-1] = f_ℓ(x_i)`: returns the
/// 1-based permutation (first in lexicographic order among ties) and its value.
pub fn best_order_brute_force(table: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let l = table.len();
    let mut perm: Vec<usize> = (0..l).collect();
    let value = |p: &[usize]| -> f64 {
        p.iter()
            .enumerate()
            .map(|(ell, &i)| table[ell][i])
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = (perm.clone(), value(&perm));
    while next_permutation(&mut perm) {
        let v = value(&perm);
        if v > best.1 {
            best = (perm.clone(), v);
        }
    }
    (best.0.iter().map(|i| i + 1).collect(), best.1)
}

struct Increment {
    linear: f64,
    log_scale: f64,
    log_rate: f64,
    sqrt: f64,
    step: f64,
    step_at: f64,
}

impl Increment {
    fn random<R: Rng + ?Sized>(rng: &mut R, zero: bool) -> Self {
        let coef = |rng: &mut R| if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random::<f64>() * 2.0 };
        if zero {
            return Self { linear: 0.0, log_scale: 0.0, log_rate: 1.0, sqrt: 0.0, step: 0.0, step_at: 0.0 };
        }
        Self {
            linear: coef(rng),
            log_scale: coef(rng),
            log_rate: 0.1 + 10.0 * rng.random::<f64>(),
            sqrt: coef(rng),
            step: coef(rng),
            step_at: 5.0 * rng.random::<f64>(),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        self.linear * x
            + self.log_scale * (1.0 + self.log_rate * x).ln()
            + self.sqrt * x.sqrt()
            + if x > self.step_at { self.step } else { 0.0 }
    }
}

fn sorted_desc(mut x: Vec<f64>) -> Vec<f64> {
    x.sort_by(|a, b| b.total_cmp(a));
    x
}

fn random_instance<R: Rng + ?Sized>(kind: FamilyKind, l: usize, rng: &mut R) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut x: Vec<f64> = (0..l).map(|_| 5.0 * rng.random::<f64>()).collect();
    let table = match kind {
        FamilyKind::Random | FamilyKind::Ties => {
            if kind == FamilyKind::Ties {
                for i in 1..l {
                    if rng.random::<f64>() < 0.4 {
                        x[i] = x[i - 1];
                    }
                }
            }
            let x = sorted_desc(x.clone());
            let incs: Vec<Increment> = (0..l)
                .map(|ell| {
                    let zero = kind == FamilyKind::Ties && ell > 0 && rng.random::<f64>() < 0.5;
                    Increment::random(rng, zero)
                })
                .collect();
            (0..l)
                .map(|ell| {
                    x.iter()
                        .map(|&xi| incs[..=ell].iter().map(|g| g.eval(xi)).sum())
                        .collect()
                })
                .collect()
        }
        FamilyKind::Constant => {
            let mut c: Vec<f64> = (0..l).map(|_| rng.random::<f64>()).collect();
            c.sort_by(f64::total_cmp);
            c.iter().map(|&ci| vec![ci; l]).collect()
        }
        FamilyKind::QlbSic => {
            let n_r = l + rng.random_range(0..=8);
            x = x.iter().map(|_| 10f64.powf(-2.0 + 5.0 * rng.random::<f64>())).collect();
            let xs = sorted_desc(x.clone());
            (1..=l)
                .map(|ell| xs.iter().map(|&xi| qlb_rate_sic(xi, n_r, l, ell)).collect::<Result<Vec<f64>>>())
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok((sorted_desc(x), table))
}

/// Draws `trials` random instances (cycling through all family kinds) and
/// compares the identity order with the brute-force optimum.
pub fn verify_sic_order_theorem<R: Rng + ?Sized>(l: usize, trials: u64, rng: &mut R) -> Result<TheoremReport> {
    if l == 0 || l > MAX_BRUTE_FORCE_L {
        return invalid(format!("brute force supports 1 <= L <= {MAX_BRUTE_FORCE_L}, got {l}"));
    }
    let mut per_family: Vec<(FamilyKind, u64)> = KINDS.iter().map(|&k| (k, 0)).collect();
    let mut counterexamples = Vec::new();
    for trial in 0..trials {
        let slot = (trial % KINDS.len() as u64) as usize;
        let kind = KINDS[slot];
        per_family[slot].1 += 1;
        let (x, table) = random_instance(kind, l, rng)?;
        let identity_value = (0..l).map(|ell| table[ell][ell]).fold(f64::INFINITY, f64::min);
        let (best_order, best_value) = best_order_brute_force(&table);
        if best_value > identity_value + 1e-12 * identity_value.abs().max(1.0) {
            counterexamples.push(Counterexample {
                kind,
                x,
                table,
                identity_value,
                best_value,
                best_order,
            });
        }
    }
    Ok(TheoremReport {
        l,
        instances: trials,
        per_family,
        counterexamples,
    })
}
