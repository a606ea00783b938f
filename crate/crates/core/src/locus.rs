//! Allele alphabets and per-locus probability vectors.

use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability vector or GPM.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Maximum |G_ij - G_ji| tolerated by [`crate::gpm::validate`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Half-width of the band in which ingested frequencies and explicit GPM
/// cells are renormalized rather than rejected.
pub const INGEST_SUM_BAND: f64 = 1e-6;

/// An STR locus: a name plus the ordered allele labels. The order of
/// `alleles` is the row/column order of every matrix over this locus.
#[derive(Clone)]
pub struct Locus {
    name: String,
    alleles: Vec<String>,
    index: HashMap<String, usize>,
}

pub type LocusRef = Arc<Locus>;

impl Locus {
    pub fn new(name: impl Into<String>, alleles: Vec<String>) -> Result<Self> {
        let name = name.into();
        if alleles.is_empty() {
            return Err(Error::InvalidLocus {
                locus: name,
                message: "no alleles".into(),
            });
        }
        let mut index = HashMap::with_capacity(alleles.len());
        for (i, allele) in alleles.iter().enumerate() {
            if index.insert(allele.clone(), i).is_some() {
                return Err(Error::DuplicateAllele {
                    locus: name,
                    allele: allele.clone(),
                });
            }
        }
        Ok(Self {
            name,
            alleles,
            index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alleles(&self) -> &[String] {
        &self.alleles
    }

    /// Number of alleles.
    pub fn k(&self) -> usize {
        self.alleles.len()
    }

    pub fn allele(&self, i: usize) -> &str {
        &self.alleles[i]
    }

    pub fn index_of(&self, allele: &str) -> Option<usize> {
        self.index.get(allele).copied()
    }

    pub fn require_index(&self, allele: &str) -> Result<usize> {
        self.index_of(allele).ok_or_else(|| Error::UnknownAllele {
            locus: self.name.clone(),
            allele: allele.to_string(),
        })
    }
}

impl PartialEq for Locus {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.alleles == other.alleles
    }
}

impl Eq for Locus {}

impl fmt::Debug for Locus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Locus")
            .field("name", &self.name)
            .field("alleles", &self.alleles)
            .finish()
    }
}

pub(crate) fn same_locus(a: &LocusRef, b: &LocusRef) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn ensure_same_locus(a: &LocusRef, b: &LocusRef) -> Result<()> {
    if same_locus(a, b) {
        Ok(())
    } else {
        Err(Error::LocusMismatch {
            left: a.name().to_string(),
            right: b.name().to_string(),
        })
    }
}

/// Distribution of a single allele over the locus alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct AlleleVector {
    locus: LocusRef,
    probs: Vec<f64>,
}

impl AlleleVector {
    /// Checks length, non-negativity and unit mass (within [`SUM_TOLERANCE`]).
    pub fn new(locus: LocusRef, probs: Vec<f64>) -> Result<Self> {
        let invalid = |message: String| Error::InvalidVector {
            locus: locus.name().to_string(),
            message,
        };
        if probs.len() != locus.k() {
            return Err(invalid(format!(
                "expected {} entries, got {}",
                locus.k(),
                probs.len()
            )));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(invalid(format!(
                "entry for allele {:?} is {p}",
                locus.allele(i)
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(invalid(format!("entries sum to {sum}")));
        }
        Ok(Self { locus, probs })
    }

    /// Point mass on one allele.
    pub fn delta(locus: LocusRef, allele: &str) -> Result<Self> {
        let i = locus.require_index(allele)?;
        let mut probs = vec![0.0; locus.k()];
        probs[i] = 1.0;
        Ok(Self { locus, probs })
    }

    pub(crate) fn from_parts_unchecked(locus: LocusRef, probs: Vec<f64>) -> Self {
        debug_assert_eq!(locus.k(), probs.len());
        Self { locus, probs }
    }

    pub fn locus(&self) -> &LocusRef {
        &self.locus
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, allele: &str) -> Result<f64> {
        Ok(self.probs[self.locus.require_index(allele)?])
    }
}

/// Background (population) allele probabilities for one locus.
#[derive(Clone, Debug, PartialEq)]
pub struct AlleleFreqVector(AlleleVector);

impl AlleleFreqVector {
    pub fn new(locus: LocusRef, probs: Vec<f64>) -> Result<Self> {
        AlleleVector::new(locus, probs).map(Self)
    }

    pub fn as_allele_vector(&self) -> &AlleleVector {
        &self.0
    }
}

impl Deref for AlleleFreqVector {
    type Target = AlleleVector;

    fn deref(&self) -> &AlleleVector {
        &self.0
    }
}
