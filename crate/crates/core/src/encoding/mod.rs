//! Expert encodings of uncertain genotypes: the allele-vector shorthand,
//! dropout interpolation, and one- or two-contributor GPM assembly.

mod designation;
mod dropout;
mod mixture;

pub use designation::{
    parse_designation, AlleleDesignation, Designation, DesignationError, DesignationErrorKind,
    Weight, SHORTHAND_DEFICIT,
};
pub use dropout::dropout_interpolation;
pub use mixture::{
    assemble_single, assemble_two_contributors, contributor_gpm, joint_table, ContributorEncoding,
    ContributorTag, Genotype, JointGenotypeTable,
};
