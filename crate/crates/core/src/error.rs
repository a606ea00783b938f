use std::path::PathBuf;

use thiserror::Error;

use crate::encoding::DesignationError;
use crate::gpm::GpmViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("frequency table: {0}")]
    Csv(#[from] csv::Error),

    #[error("frequency table line {line}: {message}")]
    FrequencyFormat { line: u64, message: String },

    #[error("duplicate allele {allele:?} at locus {locus:?} in frequency table")]
    DuplicateAllele { locus: String, allele: String },

    #[error("negative frequency {value} for allele {allele:?} at locus {locus:?}")]
    NegativeFrequency {
        locus: String,
        allele: String,
        value: f64,
    },

    #[error("frequencies at locus {locus:?} sum to {sum}, outside the accepted band")]
    FrequencySum { locus: String, sum: f64 },

    #[error("invalid locus {locus:?}: {message}")]
    InvalidLocus { locus: String, message: String },

    #[error("unknown locus {0:?}")]
    UnknownLocus(String),

    #[error("unknown allele {allele:?} at locus {locus:?}")]
    UnknownAllele { locus: String, allele: String },

    #[error("locus mismatch: {left:?} vs {right:?}")]
    LocusMismatch { left: String, right: String },

    #[error("invalid probability vector at locus {locus:?}: {message}")]
    InvalidVector { locus: String, message: String },

    #[error("invalid GPM at locus {locus:?}: {}", describe_violations(.violations))]
    InvalidGpm {
        locus: String,
        violations: Vec<GpmViolation>,
    },

    #[error("designation {text:?}: {source}")]
    Designation {
        text: String,
        #[source]
        source: DesignationError,
    },

    #[error("parameter {name} = {value} out of range: {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("unsupported contributor encoding: {0}")]
    ContributorEncoding(String),

    #[error("allele label {label:?} at locus {locus:?} is not a repeat count")]
    RepeatLabel { locus: String, label: String },

    #[error("invalid mutation matrix at locus {locus:?}: {message}")]
    InvalidMutationMatrix { locus: String, message: String },

    #[error("mutation is not supported for the full-sibling relationship")]
    SiblingMutation,

    #[error("unknown relationship {0:?}")]
    UnknownRelationship(String),

    #[error("undefined LR at locus {locus:?}: zero background probability for genotype {allele_i}/{allele_j} with positive evidence")]
    UndefinedLr {
        locus: String,
        allele_i: String,
        allele_j: String,
    },

    #[error("profiles {left:?} and {right:?} share no loci")]
    NoSharedLoci { left: String, right: String },

    #[error("profile file {source_name} line {line}: {message}")]
    ProfileFormat {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("profile {id:?} locus {locus:?}: {source}")]
    ProfileLocus {
        id: String,
        locus: String,
        #[source]
        source: Box<Error>,
    },

    #[error("comparing {left:?} with {right:?} at locus {locus:?}: {source}")]
    Comparison {
        left: String,
        right: String,
        locus: String,
        #[source]
        source: Box<Error>,
    },

    #[error("duplicate profile id {0:?}")]
    DuplicateProfile(String),

    #[error("unknown profile id {0:?}")]
    UnknownProfile(String),

    #[error("invalid search query: {0}")]
    InvalidQuery(String),

    #[error("profile store {path}: {message}")]
    Store { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error is an undefined likelihood ratio rather than bad input.
    pub fn is_undefined_lr(&self) -> bool {
        match self {
            Error::UndefinedLr { .. } => true,
            Error::ProfileLocus { source, .. } | Error::Comparison { source, .. } => {
                source.is_undefined_lr()
            }
            _ => false,
        }
    }
}

fn describe_violations(violations: &[GpmViolation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
