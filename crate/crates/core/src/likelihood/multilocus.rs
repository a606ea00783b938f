use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::freqs::FrequencySet;
use crate::profile::ResolvedProfile;
use crate::relatedness::{build_mutation_matrix, MutationMatrix, Relationship, RelationshipSpec};

use super::{lr_general, CoancestryParams, LocusLr};

/// Stepwise mutation parameters shared by every locus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MutationModel {
    pub rate: f64,
    pub up_fraction: f64,
}

/// One mutation matrix per locus of a frequency set.
#[derive(Clone, Debug)]
pub struct MutationSet {
    model: MutationModel,
    matrices: HashMap<String, MutationMatrix>,
}

impl MutationSet {
    /// Fails if any locus has an allele label that is not a repeat count.
    pub fn build(freqs: &FrequencySet, model: MutationModel) -> Result<Self> {
        let matrices = freqs
            .iter()
            .map(|lf| {
                let m = build_mutation_matrix(lf.locus(), model.rate, model.up_fraction)?;
                Ok((lf.locus().name().to_string(), m))
            })
            .collect::<Result<_>>()?;
        Ok(Self { model, matrices })
    }

    pub fn model(&self) -> MutationModel {
        self.model
    }

    pub fn get(&self, locus: &str) -> Option<&MutationMatrix> {
        self.matrices.get(locus)
    }
}

/// A relationship hypothesis tested against "unrelated".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hypothesis {
    pub relationship: Relationship,
    /// Applied only to unilineal (degree) relationships.
    pub mutation: bool,
}

impl Hypothesis {
    pub fn new(relationship: Relationship) -> Self {
        Self {
            relationship,
            mutation: false,
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.relationship)?;
        if self.mutation && matches!(self.relationship, Relationship::Degree(_)) {
            f.write_str("+mut")?;
        }
        Ok(())
    }
}

/// Per-locus LRs combined across independent loci.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiLocusLr {
    pub per_locus: Vec<LocusLr>,
    /// Loci present in only one of the two profiles.
    pub skipped: Vec<String>,
    /// `Σ log10 lr`, accumulated in log space.
    pub log10: f64,
}

impl MultiLocusLr {
    pub fn lr(&self) -> f64 {
        10f64.powf(self.log10)
    }

    pub fn shared_loci(&self) -> usize {
        self.per_locus.len()
    }
}

/// Compares two profiles locus by locus. `first` is the conditioning
/// profile for the coancestry correction and `second` the one transformed
/// into its relative.
///
/// `mutation` is used only for degree relationships; asking for a
/// mutated sibling is an error.
pub fn multi_locus_lr(
    first: &ResolvedProfile,
    second: &ResolvedProfile,
    relationship: Relationship,
    freqs: &FrequencySet,
    theta: CoancestryParams,
    mutation: Option<&MutationSet>,
) -> Result<MultiLocusLr> {
    if relationship == Relationship::FullSibling && mutation.is_some() {
        return Err(Error::SiblingMutation);
    }
    let mutation = mutation.filter(|_| matches!(relationship, Relationship::Degree(_)));

    let mut per_locus = Vec::new();
    let mut skipped = Vec::new();
    let mut log10 = 0.0;
    for (name, g1) in first.loci() {
        let Some(g2) = second.get(name) else {
            skipped.push(name.clone());
            continue;
        };
        let wrap = |source: Error| Error::Comparison {
            left: first.id().to_string(),
            right: second.id().to_string(),
            locus: name.clone(),
            source: Box::new(source),
        };
        let lf = freqs.require(name).map_err(wrap)?;
        let matrix = match mutation {
            Some(set) => Some(
                set.get(name)
                    .ok_or_else(|| wrap(Error::UnknownLocus(name.clone())))?,
            ),
            None => None,
        };
        let spec = RelationshipSpec {
            kind: relationship,
            mutation: matrix,
        };
        let lr = lr_general(g1, g2, &spec, lf, theta).map_err(wrap)?;
        log10 += lr.log10();
        per_locus.push(lr);
    }
    skipped.extend(
        second
            .loci()
            .keys()
            .filter(|name| first.get(name).is_none())
            .cloned(),
    );
    if per_locus.is_empty() {
        return Err(Error::NoSharedLoci {
            left: first.id().to_string(),
            right: second.id().to_string(),
        });
    }
    Ok(MultiLocusLr {
        per_locus,
        skipped,
        log10,
    })
}
