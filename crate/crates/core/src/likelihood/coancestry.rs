//! Balding-Nichols coancestry correction.

use crate::error::{Error, Result};
use crate::freqs::LocusFrequencies;
use crate::gpm::Gpm;
use crate::locus::{ensure_same_locus, AlleleFreqVector, LocusRef};

use super::undefined_lr;

/// Coancestry coefficient θ (F_ST), `0 ≤ θ < 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct CoancestryParams {
    theta: f64,
}

impl CoancestryParams {
    pub const NONE: Self = Self { theta: 0.0 };

    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&theta) {
            return Err(Error::OutOfRange {
                name: "theta",
                value: theta,
                expected: "0 <= theta < 1",
            });
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_zero(&self) -> bool {
        self.theta == 0.0
    }
}

/// Probability that the next allele drawn is `a` after `seen` alleles.
#[inline]
fn next_allele(b: &[f64], theta: f64, seen: &[usize], a: usize) -> f64 {
    let m = seen.iter().filter(|&&s| s == a).count() as f64;
    let n = seen.len() as f64;
    (m * theta + (1.0 - theta) * b[a]) / (1.0 + (n - 1.0) * theta)
}

/// Cell `(p, q)` of `B_{|ij}` for `p ≤ q`.
#[inline]
fn conditional_cell(b: &[f64], theta: f64, i: usize, j: usize, p: usize, q: usize) -> f64 {
    next_allele(b, theta, &[i, j], p) * next_allele(b, theta, &[i, j, p], q)
}

/// GPM of a second individual from the same subpopulation, given that the
/// first has genotype `allele_i`/`allele_j`.
pub fn conditional_gpm(
    locus: &LocusRef,
    allele_i: &str,
    allele_j: &str,
    b: &AlleleFreqVector,
    theta: CoancestryParams,
) -> Result<Gpm> {
    ensure_same_locus(locus, b.locus())?;
    let i = locus.require_index(allele_i)?;
    let j = locus.require_index(allele_j)?;
    let probs = b.probs();
    Ok(Gpm::from_upper_fn(locus.clone(), |p, q| {
        conditional_cell(probs, theta.theta, i, j, p, q)
    }))
}

/// `Σ_ij G1_ij·Σ_pq G2_pq·B_{pq|ij}/B_pq`; exactly 1 when θ = 0.
///
/// `G1` is the conditioning profile.
pub fn subpop_correction(
    g1: &Gpm,
    g2: &Gpm,
    freqs: &LocusFrequencies,
    theta: CoancestryParams,
) -> Result<f64> {
    ensure_same_locus(g1.locus(), g2.locus())?;
    ensure_same_locus(g1.locus(), freqs.locus())?;
    if theta.is_zero() {
        return Ok(1.0);
    }
    let b = freqs.freqs().probs();
    let bg = freqs.background();
    let second: Vec<(usize, usize, f64)> = g2.support().collect();
    let mut total = 0.0;
    for (i, j, w1) in g1.support() {
        let mut h = 0.0;
        for &(p, q, w2) in &second {
            let num = w2 * conditional_cell(b, theta.theta, i, j, p, q);
            if num == 0.0 {
                continue;
            }
            let bpq = bg.cell(p, q);
            if bpq == 0.0 {
                return Err(undefined_lr(g2.locus(), p, q));
            }
            let term = num / bpq;
            h += if p == q { term } else { 2.0 * term };
        }
        let term = w1 * h;
        total += if i == j { term } else { 2.0 * term };
    }
    Ok(total)
}
