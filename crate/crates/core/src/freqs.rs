//! Population allele frequency tables.
//!
//! The on-disk format is UTF-8 CSV with header `locus,allele,frequency`, one
//! row per allele. Lines starting with `#` are comments. Allele order within
//! a locus is the order rows first appear, and that order becomes the
//! matrix index order for every GPM over the locus.

use std::path::Path;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::gpm::{background_gpm, Gpm};
use crate::locus::{AlleleFreqVector, Locus, LocusRef, INGEST_SUM_BAND};

/// Frequencies and the derived background GPM for one locus.
#[derive(Clone, Debug)]
pub struct LocusFrequencies {
    freqs: AlleleFreqVector,
    background: Gpm,
}

impl LocusFrequencies {
    pub fn new(freqs: AlleleFreqVector) -> Self {
        let background = background_gpm(&freqs);
        Self { freqs, background }
    }

    pub fn locus(&self) -> &LocusRef {
        self.freqs.locus()
    }

    pub fn freqs(&self) -> &AlleleFreqVector {
        &self.freqs
    }

    pub fn background(&self) -> &Gpm {
        &self.background
    }
}

/// All loci of a frequency table, in file order.
#[derive(Clone, Debug, Default)]
pub struct FrequencySet {
    loci: IndexMap<String, LocusFrequencies>,
}

impl FrequencySet {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        load_frequencies(&text)
    }

    pub fn from_vectors(vectors: impl IntoIterator<Item = AlleleFreqVector>) -> Self {
        let loci = vectors
            .into_iter()
            .map(|v| (v.locus().name().to_string(), LocusFrequencies::new(v)))
            .collect();
        Self { loci }
    }

    pub fn get(&self, locus: &str) -> Option<&LocusFrequencies> {
        self.loci.get(locus)
    }

    pub fn require(&self, locus: &str) -> Result<&LocusFrequencies> {
        self.get(locus)
            .ok_or_else(|| Error::UnknownLocus(locus.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &LocusFrequencies> {
        self.loci.values()
    }

    pub fn locus_names(&self) -> impl Iterator<Item = &str> {
        self.loci.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.loci.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loci.is_empty()
    }

    /// Adds `allele` to `locus` with frequency `floor` and rescales the
    /// existing frequencies by `1 - floor`. No-op if the allele is present.
    /// Must run before any GPM over the locus is built: the locus alphabet
    /// is replaced.
    pub fn add_floor_allele(&mut self, locus: &str, allele: &str, floor: f64) -> Result<()> {
        if !(floor > 0.0 && floor < 1.0) {
            return Err(Error::OutOfRange {
                name: "minimum frequency",
                value: floor,
                expected: "0 < floor < 1",
            });
        }
        let current = self.require(locus)?;
        if current.locus().index_of(allele).is_some() {
            return Ok(());
        }
        let mut alleles = current.locus().alleles().to_vec();
        alleles.push(allele.to_string());
        let mut probs: Vec<f64> = current
            .freqs()
            .probs()
            .iter()
            .map(|p| p * (1.0 - floor))
            .collect();
        probs.push(floor);
        let new_locus = Arc::new(Locus::new(locus, alleles)?);
        let freqs = AlleleFreqVector::new(new_locus, probs)?;
        self.loci
            .insert(locus.to_string(), LocusFrequencies::new(freqs));
        Ok(())
    }
}

/// Parses a frequency table. Per-locus totals within [`INGEST_SUM_BAND`] of
/// one are renormalized; anything further out is rejected.
pub fn load_frequencies(source: &str) -> Result<FrequencySet> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source.as_bytes());

    let headers = reader.headers()?.clone();
    let expected = ["locus", "allele", "frequency"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(Error::FrequencyFormat {
            line: 1,
            message: format!("expected header `locus,allele,frequency`, found {headers:?}"),
        });
    }

    let mut rows: IndexMap<String, IndexMap<String, f64>> = IndexMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let (locus, allele, freq) = (&record[0], &record[1], &record[2]);
        if locus.is_empty() || allele.is_empty() {
            return Err(Error::FrequencyFormat {
                line,
                message: "empty locus or allele".into(),
            });
        }
        let value: f64 = freq.parse().map_err(|_| Error::FrequencyFormat {
            line,
            message: format!("frequency {freq:?} is not a number"),
        })?;
        if !value.is_finite() {
            return Err(Error::FrequencyFormat {
                line,
                message: format!("frequency {freq:?} is not finite"),
            });
        }
        if value < 0.0 {
            return Err(Error::NegativeFrequency {
                locus: locus.to_string(),
                allele: allele.to_string(),
                value,
            });
        }
        let alleles = rows.entry(locus.to_string()).or_default();
        if alleles.insert(allele.to_string(), value).is_some() {
            return Err(Error::DuplicateAllele {
                locus: locus.to_string(),
                allele: allele.to_string(),
            });
        }
    }

    let mut loci = IndexMap::with_capacity(rows.len());
    for (name, alleles) in rows {
        let sum: f64 = alleles.values().sum();
        if sum.is_nan() || (sum - 1.0).abs() > INGEST_SUM_BAND {
            return Err(Error::FrequencySum { locus: name, sum });
        }
        let (labels, probs): (Vec<String>, Vec<f64>) =
            alleles.into_iter().map(|(a, p)| (a, p / sum)).unzip();
        let locus = Arc::new(Locus::new(name.clone(), labels)?);
        let freqs = AlleleFreqVector::new(locus, probs)?;
        loci.insert(name, LocusFrequencies::new(freqs));
    }
    Ok(FrequencySet { loci })
}
