//! Genotype probability matrices.
//!
//! A GPM over a locus with `k` alleles is a symmetric `k × k` matrix with
//! nonnegative entries summing to one. Diagonal entries are homozygote
//! probabilities; each off-diagonal cell holds half of the corresponding
//! heterozygote probability.

use std::fmt;

use crate::error::{Error, Result};
use crate::locus::{
    ensure_same_locus, AlleleFreqVector, AlleleVector, LocusRef, INGEST_SUM_BAND, SUM_TOLERANCE,
    SYMMETRY_TOLERANCE,
};

#[derive(Clone, Debug, PartialEq)]
pub struct Gpm {
    locus: LocusRef,
    /// Row-major `k × k`.
    cells: Vec<f64>,
}

/// One violated GPM invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum GpmViolation {
    Shape { expected: usize, actual: usize },
    NonFinite { i: usize, j: usize },
    Negative { i: usize, j: usize, value: f64 },
    Asymmetric { i: usize, j: usize, difference: f64 },
    Sum { sum: f64 },
}

impl fmt::Display for GpmViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GpmViolation::Shape { expected, actual } => {
                write!(f, "expected {expected} cells, got {actual}")
            }
            GpmViolation::NonFinite { i, j } => write!(f, "cell ({i},{j}) is not finite"),
            GpmViolation::Negative { i, j, value } => {
                write!(f, "cell ({i},{j}) is negative ({value})")
            }
            GpmViolation::Asymmetric { i, j, difference } => {
                write!(f, "cells ({i},{j}) and ({j},{i}) differ by {difference}")
            }
            GpmViolation::Sum { sum } => write!(f, "cells sum to {sum}"),
        }
    }
}

/// Checks a raw row-major matrix against the GPM invariants. Never fails;
/// an empty report means the matrix is a valid GPM.
pub fn validate_cells(k: usize, cells: &[f64]) -> Vec<GpmViolation> {
    let mut report = Vec::new();
    if cells.len() != k * k {
        report.push(GpmViolation::Shape {
            expected: k * k,
            actual: cells.len(),
        });
        return report;
    }
    for i in 0..k {
        for j in 0..k {
            let v = cells[i * k + j];
            if !v.is_finite() {
                report.push(GpmViolation::NonFinite { i, j });
            } else if v < 0.0 {
                report.push(GpmViolation::Negative { i, j, value: v });
            }
            if j > i {
                let difference = (v - cells[j * k + i]).abs();
                if difference > SYMMETRY_TOLERANCE || difference.is_nan() {
                    report.push(GpmViolation::Asymmetric { i, j, difference });
                }
            }
        }
    }
    let sum: f64 = cells.iter().sum();
    if sum.is_nan() || (sum - 1.0).abs() > SUM_TOLERANCE {
        report.push(GpmViolation::Sum { sum });
    }
    report
}

/// Validation report for an existing GPM.
pub fn validate(g: &Gpm) -> Vec<GpmViolation> {
    validate_cells(g.k(), &g.cells)
}

impl Gpm {
    /// Builds a GPM from a row-major matrix, rejecting any invariant violation.
    pub fn from_cells(locus: LocusRef, cells: Vec<f64>) -> Result<Self> {
        let violations = validate_cells(locus.k(), &cells);
        if !violations.is_empty() {
            return Err(Error::InvalidGpm {
                locus: locus.name().to_string(),
                violations,
            });
        }
        Ok(Self { locus, cells })
    }

    /// Ingestion path for user-supplied matrices: a total within
    /// [`INGEST_SUM_BAND`] of one is rescaled to one before validation.
    pub fn from_cells_normalized(locus: LocusRef, mut cells: Vec<f64>) -> Result<Self> {
        let sum: f64 = cells.iter().sum();
        if sum.is_finite() && (sum - 1.0).abs() <= INGEST_SUM_BAND && sum > 0.0 {
            cells.iter_mut().for_each(|c| *c /= sum);
        }
        Self::from_cells(locus, cells)
    }

    /// Fills the upper triangle from `f(i, j)` (i ≤ j) and mirrors it, so the
    /// result is exactly symmetric.
    pub(crate) fn from_upper_fn(locus: LocusRef, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let k = locus.k();
        let mut cells = vec![0.0; k * k];
        for i in 0..k {
            for j in i..k {
                let v = f(i, j);
                cells[i * k + j] = v;
                cells[j * k + i] = v;
            }
        }
        Self { locus, cells }
    }

    pub fn locus(&self) -> &LocusRef {
        &self.locus
    }

    pub fn k(&self) -> usize {
        self.locus.k()
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.k() + j]
    }

    /// Cell lookup by allele label.
    pub fn entry(&self, allele_i: &str, allele_j: &str) -> Result<f64> {
        let i = self.locus.require_index(allele_i)?;
        let j = self.locus.require_index(allele_j)?;
        Ok(self.cell(i, j))
    }

    /// Upper-triangle cells with positive mass, as `(i, j, G_ij)` with `i ≤ j`.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let k = self.k();
        (0..k).flat_map(move |i| {
            (i..k).filter_map(move |j| {
                let v = self.cells[i * k + j];
                (v > 0.0).then_some((i, j, v))
            })
        })
    }

    /// Row sums: the allele distribution of one randomly chosen allele.
    pub fn marginal(&self) -> AlleleVector {
        let k = self.k();
        let probs = self
            .cells
            .chunks_exact(k)
            .map(|row| row.iter().sum())
            .collect();
        AlleleVector::from_parts_unchecked(self.locus.clone(), probs)
    }

    /// Probability of the unordered genotype `{i, j}` by index.
    pub fn genotype_prob_at(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.cell(i, i)
        } else {
            2.0 * self.cell(i, j)
        }
    }

    /// Probability of the unordered genotype `{allele_i, allele_j}`.
    pub fn genotype_probability(&self, allele_i: &str, allele_j: &str) -> Result<f64> {
        let i = self.locus.require_index(allele_i)?;
        let j = self.locus.require_index(allele_j)?;
        Ok(self.genotype_prob_at(i, j))
    }
}

/// `B = bᵀb`: the background GPM under Hardy-Weinberg equilibrium.
pub fn background_gpm(b: &AlleleFreqVector) -> Gpm {
    let p = b.probs();
    Gpm::from_upper_fn(b.locus().clone(), |i, j| p[i] * p[j])
}

/// GPM assigning probability one to the genotype `{allele_i, allele_j}`.
pub fn gpm_from_genotype(locus: &LocusRef, allele_i: &str, allele_j: &str) -> Result<Gpm> {
    let i = locus.require_index(allele_i)?;
    let j = locus.require_index(allele_j)?;
    Ok(certain_gpm(locus, i, j))
}

pub(crate) fn certain_gpm(locus: &LocusRef, i: usize, j: usize) -> Gpm {
    let (lo, hi) = (i.min(j), i.max(j));
    Gpm::from_upper_fn(locus.clone(), |p, q| {
        if (p, q) != (lo, hi) {
            0.0
        } else if lo == hi {
            1.0
        } else {
            0.5
        }
    })
}

/// Symmetric product `(uᵀv + vᵀu)/2` of two allele vectors.
pub fn gpm_from_allele_vectors(u: &AlleleVector, v: &AlleleVector) -> Result<Gpm> {
    ensure_same_locus(u.locus(), v.locus())?;
    Ok(symmetric_product(u.locus(), u.probs(), v.probs()))
}

/// `(xᵀy + yᵀx)/2` without validation; `x` and `y` must have length `k`.
/// Exactly symmetric in `x` and `y`.
pub(crate) fn symmetric_product(locus: &LocusRef, x: &[f64], y: &[f64]) -> Gpm {
    Gpm::from_upper_fn(locus.clone(), |i, j| (x[i] * y[j] + y[i] * x[j]) / 2.0)
}

/// Row sums of `g` (see [`Gpm::marginal`]).
pub fn marginal_allele_vector(g: &Gpm) -> AlleleVector {
    g.marginal()
}
