use crate::error::{Error, Result};
use crate::gpm::{gpm_from_allele_vectors, Gpm};
use crate::locus::{AlleleFreqVector, AlleleVector};

/// Single-contributor encoding for one certain allele `certain` and one
/// doubtful allele `doubtful` that may instead be a dropout.
///
/// `gamma` is the probability that the genotype is `certain`-homozygous
/// rather than heterozygous with `doubtful`; `delta` interpolates between
/// ignoring dropout (0) and treating the second allele as a background draw
/// (1). Genotype probabilities:
///
/// * AA: Γ(1−Δ) + ΓΔ·b_A
/// * AB: (1−Γ) + ΓΔ·b_B
/// * AX: ΓΔ·b_X for every other allele X
pub fn dropout_interpolation(
    gamma: f64,
    delta: f64,
    certain: &str,
    doubtful: &str,
    b: &AlleleFreqVector,
) -> Result<Gpm> {
    for (name, value) in [("gamma", gamma), ("delta", delta)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OutOfRange {
                name,
                value,
                expected: "[0, 1]",
            });
        }
    }
    let locus = b.locus();
    let a = locus.require_index(certain)?;
    let d = locus.require_index(doubtful)?;
    if a == d {
        return Err(Error::OutOfRange {
            name: "doubtful allele index",
            value: d as f64,
            expected: "an allele different from the certain allele",
        });
    }

    // The second allele: A with prob Γ(1−Δ), B with prob 1−Γ, and a
    // background draw with prob ΓΔ.
    let background_share = gamma * delta;
    let mut second: Vec<f64> = b.probs().iter().map(|p| background_share * p).collect();
    second[a] += gamma * (1.0 - delta);
    second[d] += 1.0 - gamma;

    let first = AlleleVector::delta(locus.clone(), certain)?;
    let second = AlleleVector::new(locus.clone(), second)?;
    gpm_from_allele_vectors(&first, &second)
}
