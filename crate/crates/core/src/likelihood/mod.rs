//! Likelihood ratios between two GPMs.
//!
//! All kernels walk the upper triangle of the first GPM's support and
//! weight off-diagonal cells twice, so zero cells of `G1` are never touched
//! and a cell whose numerator vanishes contributes exactly 0 whatever the
//! background holds there.

mod coancestry;
mod multilocus;
mod sibling;

pub use coancestry::{conditional_gpm, subpop_correction, CoancestryParams};
pub use multilocus::{multi_locus_lr, Hypothesis, MultiLocusLr, MutationModel, MutationSet};
pub use sibling::sibling_lr_closed_form;

use crate::error::{Error, Result};
use crate::freqs::LocusFrequencies;
use crate::gpm::Gpm;
use crate::locus::{ensure_same_locus, Locus};
use crate::relatedness::{RelationshipSpec, RelativeView};

/// Single-locus LR: `lr = numerator / denominator`, where the denominator
/// is the coancestry correction factor (exactly 1 when θ = 0).
#[derive(Clone, Debug, PartialEq)]
pub struct LocusLr {
    pub locus: String,
    pub lr: f64,
    pub numerator: f64,
    pub denominator: f64,
}

impl LocusLr {
    fn uncorrected(locus: &Locus, numerator: f64) -> Self {
        Self {
            locus: locus.name().to_string(),
            lr: numerator,
            numerator,
            denominator: 1.0,
        }
    }

    pub fn log10(&self) -> f64 {
        self.lr.log10()
    }
}

pub(crate) fn undefined_lr(locus: &Locus, i: usize, j: usize) -> Error {
    Error::UndefinedLr {
        locus: locus.name().to_string(),
        allele_i: locus.allele(i).to_string(),
        allele_j: locus.allele(j).to_string(),
    }
}

/// `Σ_ij G1_ij·entry(i, j)/B_ij` over the support of `G1`.
fn weighted_sum(g1: &Gpm, bg: &Gpm, entry: impl Fn(usize, usize) -> f64) -> Result<f64> {
    let mut total = 0.0;
    for (i, j, g) in g1.support() {
        let num = g * entry(i, j);
        if num == 0.0 {
            continue;
        }
        let b = bg.cell(i, j);
        if b == 0.0 {
            return Err(undefined_lr(g1.locus(), i, j));
        }
        let term = num / b;
        total += if i == j { term } else { 2.0 * term };
    }
    Ok(total)
}

/// Same-source LR against unrelated: `Σ_ij G1_ij·G2_ij/B_ij`.
pub fn lr_same(g1: &Gpm, g2: &Gpm, bg: &Gpm) -> Result<LocusLr> {
    ensure_same_locus(g1.locus(), g2.locus())?;
    ensure_same_locus(g1.locus(), bg.locus())?;
    let numerator = weighted_sum(g1, bg, |i, j| g2.cell(i, j))?;
    Ok(LocusLr::uncorrected(g1.locus(), numerator))
}

/// LR that the source of `G1` is the stated relative of the source of `G2`,
/// under Hardy-Weinberg equilibrium: `Σ_ij G1_ij·R(G2)_ij/B_ij`.
///
/// `R(G2)` is evaluated only on the support of `G1`.
pub fn lr_related(
    g1: &Gpm,
    g2: &Gpm,
    spec: &RelationshipSpec<'_>,
    freqs: &LocusFrequencies,
) -> Result<LocusLr> {
    ensure_same_locus(g1.locus(), g2.locus())?;
    ensure_same_locus(g1.locus(), freqs.locus())?;
    let view = RelativeView::new(g2, spec, freqs.freqs())?;
    let numerator = weighted_sum(g1, freqs.background(), |i, j| view.entry(i, j))?;
    Ok(LocusLr::uncorrected(g1.locus(), numerator))
}

/// Coancestry-corrected LR: [`lr_related`] divided by
/// [`subpop_correction`].
///
/// Under the unrelated hypothesis the genotype behind `G2` is drawn
/// conditionally on the genotype behind `G1`, so for θ > 0 swapping the
/// arguments can change the result.
pub fn lr_general(
    g1: &Gpm,
    g2: &Gpm,
    spec: &RelationshipSpec<'_>,
    freqs: &LocusFrequencies,
    theta: CoancestryParams,
) -> Result<LocusLr> {
    let mut out = lr_related(g1, g2, spec, freqs)?;
    let denominator = subpop_correction(g1, g2, freqs, theta)?;
    out.denominator = denominator;
    out.lr = out.numerator / denominator;
    Ok(out)
}
