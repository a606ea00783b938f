//! Genotype probability matrices (GPMs) for uncertain DNA profiles.
//!
//! A GPM encodes a probability distribution over the genotypes of one
//! contributor at one STR locus. This crate builds GPMs from expert
//! shorthand, derives the GPMs of relatives, computes likelihood ratios for
//! same-source, familial and coancestry-corrected hypotheses, and searches
//! stores of multi-locus profiles.

pub mod encoding;
pub mod error;
pub mod freqs;
pub mod gpm;
pub mod likelihood;
pub mod locus;
pub mod profile;
pub mod relatedness;

pub use error::{Error, Result};
pub use freqs::{load_frequencies, FrequencySet, LocusFrequencies};
pub use gpm::{
    background_gpm, gpm_from_allele_vectors, gpm_from_genotype, marginal_allele_vector, validate,
    Gpm, GpmViolation,
};
pub use locus::{AlleleFreqVector, AlleleVector, Locus, LocusRef};
