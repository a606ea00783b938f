//! Assembly of contributor GPMs from allele vectors.
//!
//! An N-contributor encoding (N ∈ {1, 2}) is 2N allele vectors. Each vector
//! of a two-contributor encoding is tagged with the contributor it belongs
//! to, or `Either` when the expert cannot tell. Every assignment of the four
//! vectors to (major pair, minor pair) that respects the tags is taken as
//! equally likely; contributor GPMs are the averages over those assignments.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gpm::{gpm_from_allele_vectors, Gpm};
use crate::locus::{ensure_same_locus, AlleleVector, LocusRef};

use super::designation::AlleleDesignation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ContributorTag {
    Major,
    Minor,
    Either,
}

impl FromStr for ContributorTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "major" | "1" => Ok(Self::Major),
            "minor" | "2" => Ok(Self::Minor),
            "either" => Ok(Self::Either),
            _ => Err(Error::ContributorEncoding(format!(
                "unknown contributor tag {s:?} (expected major, minor or either)"
            ))),
        }
    }
}

impl fmt::Display for ContributorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Major => "major",
            Self::Minor => "minor",
            Self::Either => "either",
        })
    }
}

/// Allele vectors for one or two contributors with their tags.
#[derive(Clone, Debug)]
pub struct ContributorEncoding {
    vectors: Vec<AlleleDesignation>,
    tags: Vec<ContributorTag>,
}

/// An assignment of vector indices to contributor 1 and contributor 2.
type Pairing = ([usize; 2], [usize; 2]);

impl ContributorEncoding {
    /// Accepted tag patterns for four vectors (in any order): two major and
    /// two minor; one major, one minor and two either; all either. Two
    /// vectors encode a single contributor and may not be tagged minor.
    pub fn new(vectors: Vec<AlleleDesignation>, tags: Vec<ContributorTag>) -> Result<Self> {
        if vectors.len() != tags.len() {
            return Err(Error::ContributorEncoding(format!(
                "{} vectors but {} tags",
                vectors.len(),
                tags.len()
            )));
        }
        if let Some(first) = vectors.first() {
            for v in &vectors[1..] {
                ensure_same_locus(first.resolved().locus(), v.resolved().locus())?;
            }
        }
        let count = |t| tags.iter().filter(|&&x| x == t).count();
        let (major, minor, either) = (
            count(ContributorTag::Major),
            count(ContributorTag::Minor),
            count(ContributorTag::Either),
        );
        let supported = match vectors.len() {
            2 => minor == 0,
            4 => matches!((major, minor, either), (2, 2, 0) | (1, 1, 2) | (0, 0, 4)),
            n => {
                return Err(Error::ContributorEncoding(format!(
                    "{n} allele vectors; expected 2 (one contributor) or 4 (two contributors)"
                )))
            }
        };
        if !supported {
            return Err(Error::ContributorEncoding(format!(
                "tag pattern {major} major / {minor} minor / {either} either is not supported"
            )));
        }
        Ok(Self { vectors, tags })
    }

    /// One contributor from two vectors.
    pub fn single(u: AlleleDesignation, v: AlleleDesignation) -> Result<Self> {
        Self::new(vec![u, v], vec![ContributorTag::Either; 2])
    }

    pub fn contributors(&self) -> usize {
        self.vectors.len() / 2
    }

    pub fn vectors(&self) -> &[AlleleDesignation] {
        &self.vectors
    }

    pub fn tags(&self) -> &[ContributorTag] {
        &self.tags
    }

    pub fn locus(&self) -> &LocusRef {
        self.vectors[0].resolved().locus()
    }

    fn vector(&self, i: usize) -> &AlleleVector {
        self.vectors[i].resolved()
    }

    /// Ordered (contributor 1, contributor 2) pairings consistent with the tags.
    fn pairings(&self) -> Vec<Pairing> {
        use ContributorTag::*;
        let mut out = Vec::new();
        for a in 0..4 {
            for b in (a + 1)..4 {
                let first = [a, b];
                let rest: Vec<usize> = (0..4).filter(|i| !first.contains(i)).collect();
                let second = [rest[0], rest[1]];
                let fits = |pair: [usize; 2], forbidden: ContributorTag| {
                    pair.iter().all(|&i| self.tags[i] != forbidden)
                };
                if fits(first, Minor) && fits(second, Major) {
                    out.push((first, second));
                }
            }
        }
        out
    }

    fn pair_gpm(&self, pair: [usize; 2]) -> Gpm {
        gpm_from_allele_vectors(self.vector(pair[0]), self.vector(pair[1]))
            .expect("vectors share a locus")
    }
}

/// `[uv] = (uᵀv + vᵀu)/2`.
pub fn assemble_single(u: &AlleleVector, v: &AlleleVector) -> Result<Gpm> {
    gpm_from_allele_vectors(u, v)
}

fn average(locus: &LocusRef, gpms: &[Gpm]) -> Gpm {
    let n = gpms.len() as f64;
    Gpm::from_upper_fn(locus.clone(), |i, j| {
        gpms.iter().map(|g| g.cell(i, j)).sum::<f64>() / n
    })
}

/// Major and minor marginal GPMs of a two-contributor encoding.
pub fn assemble_two_contributors(enc: &ContributorEncoding) -> Result<(Gpm, Gpm)> {
    if enc.contributors() != 2 {
        return Err(Error::ContributorEncoding(
            "two-contributor assembly needs four allele vectors".into(),
        ));
    }
    let pairings = enc.pairings();
    let majors: Vec<Gpm> = pairings.iter().map(|(p, _)| enc.pair_gpm(*p)).collect();
    let minors: Vec<Gpm> = pairings.iter().map(|(_, p)| enc.pair_gpm(*p)).collect();
    Ok((average(enc.locus(), &majors), average(enc.locus(), &minors)))
}

/// GPM of the selected contributor: the only one for a single-contributor
/// encoding, else the major or minor marginal.
pub fn contributor_gpm(enc: &ContributorEncoding, which: ContributorTag) -> Result<Gpm> {
    if enc.contributors() == 1 {
        return assemble_single(enc.vector(0), enc.vector(1));
    }
    let (major, minor) = assemble_two_contributors(enc)?;
    Ok(match which {
        ContributorTag::Minor => minor,
        ContributorTag::Major | ContributorTag::Either => major,
    })
}

/// Unordered genotype as allele indices with `.0 ≤ .1`.
pub type Genotype = (usize, usize);

/// Joint distribution of the two contributors' unordered genotypes.
#[derive(Clone, Debug, PartialEq)]
pub struct JointGenotypeTable {
    locus: LocusRef,
    probs: BTreeMap<(Genotype, Genotype), f64>,
}

impl JointGenotypeTable {
    pub fn locus(&self) -> &LocusRef {
        &self.locus
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Genotype, Genotype), &f64)> {
        self.probs.iter()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Probability that contributor 1 has `first` and contributor 2 has
    /// `second` (each an unordered allele pair).
    pub fn get(&self, first: (&str, &str), second: (&str, &str)) -> Result<f64> {
        let g1 = self.genotype(first)?;
        let g2 = self.genotype(second)?;
        Ok(self.probs.get(&(g1, g2)).copied().unwrap_or(0.0))
    }

    fn genotype(&self, (a, b): (&str, &str)) -> Result<Genotype> {
        let i = self.locus.require_index(a)?;
        let j = self.locus.require_index(b)?;
        Ok((i.min(j), i.max(j)))
    }

    /// Marginal genotype distribution of contributor 1 (`first = true`) or 2.
    pub fn marginal(&self, first: bool) -> BTreeMap<Genotype, f64> {
        let mut out = BTreeMap::new();
        for (&(g1, g2), &p) in &self.probs {
            *out.entry(if first { g1 } else { g2 }).or_insert(0.0) += p;
        }
        out
    }

    /// The marginal of one contributor as a GPM.
    pub fn marginal_gpm(&self, first: bool) -> Gpm {
        let marginal = self.marginal(first);
        Gpm::from_upper_fn(self.locus.clone(), |i, j| {
            let p = marginal.get(&(i, j)).copied().unwrap_or(0.0);
            if i == j {
                p
            } else {
                p / 2.0
            }
        })
    }
}

fn genotype_distribution(g: &Gpm) -> Vec<(Genotype, f64)> {
    g.support()
        .map(|(i, j, _)| ((i, j), g.genotype_prob_at(i, j)))
        .collect()
}

/// Joint genotype table of a two-contributor encoding. Within one pairing
/// the contributors are independent; the table averages over pairings.
pub fn joint_table(enc: &ContributorEncoding) -> Result<JointGenotypeTable> {
    if enc.contributors() != 2 {
        return Err(Error::ContributorEncoding(
            "joint genotype table needs four allele vectors".into(),
        ));
    }
    let pairings = enc.pairings();
    let weight = 1.0 / pairings.len() as f64;
    let mut probs = BTreeMap::new();
    for (first, second) in pairings {
        let d1 = genotype_distribution(&enc.pair_gpm(first));
        let d2 = genotype_distribution(&enc.pair_gpm(second));
        for &(g1, p1) in &d1 {
            for &(g2, p2) in &d2 {
                *probs.entry((g1, g2)).or_insert(0.0) += weight * p1 * p2;
            }
        }
    }
    Ok(JointGenotypeTable {
        locus: enc.locus().clone(),
        probs,
    })
}
