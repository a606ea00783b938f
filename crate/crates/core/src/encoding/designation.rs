//! Shorthand allele-vector notation.
//!
//! ```text
//! designation := 'F' | item ('/' item)*
//! item        := allele ('@' weight)?
//! weight      := decimal | 'B'
//! ```
//!
//! A weight applies to its own allele and to every weightless allele before
//! it back to the previous weighted item, so `11/12/13@0.33` gives each of
//! the three alleles 0.33. Alleles in `@B` groups, plus any weightless run at
//! the end, share whatever mass the numeric weights leave over, in proportion
//! to their background frequencies. `F` puts every allele of the locus in a
//! single `@B` group. A lone allele with no `@` (e.g. `11`) is certain.

use std::fmt;

use crate::error::{Error, Result};
use crate::locus::{AlleleFreqVector, AlleleVector, SUM_TOLERANCE};

/// Numeric weights with no background group may fall this far short of one
/// and are then rescaled (`11/12/13@0.33` sums to 0.99).
pub const SHORTHAND_DEFICIT: f64 = 0.02;

#[derive(Clone, Debug, PartialEq)]
pub enum DesignationErrorKind {
    Empty,
    EmptyAllele,
    UnexpectedChar(char),
    ExpectedWeight,
    InvalidWeight(String),
    NegativeWeight(String),
    UnknownAllele(String),
    DuplicateAllele(String),
    WeightsExceedOne(f64),
    WeightsBelowOne(f64),
    NoBackgroundMass,
}

/// Parse or resolution failure; `column` is 1-based and counts characters.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub struct DesignationError {
    pub column: usize,
    pub kind: DesignationErrorKind,
}

impl fmt::Display for DesignationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DesignationErrorKind::*;
        write!(f, "at column {}: ", self.column)?;
        match &self.kind {
            Empty => write!(f, "empty designation"),
            EmptyAllele => write!(f, "expected an allele label"),
            UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ExpectedWeight => write!(f, "expected a weight (decimal or 'B') after '@'"),
            InvalidWeight(w) => write!(f, "invalid weight {w:?}"),
            NegativeWeight(w) => write!(f, "negative weight {w:?}"),
            UnknownAllele(a) => write!(f, "unknown allele {a:?}"),
            DuplicateAllele(a) => write!(f, "allele {a:?} listed more than once"),
            WeightsExceedOne(s) => write!(f, "numeric weights sum to {s} > 1"),
            WeightsBelowOne(s) => {
                write!(f, "numeric weights sum to {s} < 1 with no background group")
            }
            NoBackgroundMass => write!(
                f,
                "background group has zero total frequency but must absorb residual mass"
            ),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    Value(f64),
    Background,
}

#[derive(Clone, Debug, PartialEq)]
struct AlleleRef {
    label: String,
    column: usize,
}

#[derive(Clone, Debug, PartialEq)]
struct Group {
    alleles: Vec<AlleleRef>,
    /// `None` only for a trailing weightless run.
    weight: Option<Weight>,
}

/// A parsed designation, not yet bound to frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct Designation {
    raw: String,
    body: Body,
}

#[derive(Clone, Debug, PartialEq)]
enum Body {
    Full,
    Groups(Vec<Group>),
}

fn err<T>(column: usize, kind: DesignationErrorKind) -> Result<T, DesignationError> {
    Err(DesignationError { column, kind })
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn groups(&mut self) -> Result<Vec<Group>, DesignationError> {
        let mut groups = Vec::new();
        let mut run = Vec::new();
        loop {
            run.push(self.allele()?);
            if self.peek() == Some('@') {
                self.pos += 1;
                let weight = self.weight()?;
                groups.push(Group {
                    alleles: std::mem::take(&mut run),
                    weight: Some(weight),
                });
            }
            match self.peek() {
                None => break,
                Some('/') => self.pos += 1,
                Some(c) => return err(self.column(), DesignationErrorKind::UnexpectedChar(c)),
            }
        }
        if !run.is_empty() {
            groups.push(Group {
                alleles: run,
                weight: None,
            });
        }
        Ok(groups)
    }

    fn allele(&mut self) -> Result<AlleleRef, DesignationError> {
        let column = self.column();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == '/' || c == '@' {
                break;
            }
            if c.is_whitespace() {
                return err(self.column(), DesignationErrorKind::UnexpectedChar(c));
            }
            self.pos += 1;
        }
        if self.pos == start {
            return err(column, DesignationErrorKind::EmptyAllele);
        }
        Ok(AlleleRef {
            label: self.chars[start..self.pos].iter().collect(),
            column,
        })
    }

    fn weight(&mut self) -> Result<Weight, DesignationError> {
        let column = self.column();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == '/' {
                break;
            }
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        if text.is_empty() {
            return err(column, DesignationErrorKind::ExpectedWeight);
        }
        if text == "B" {
            return Ok(Weight::Background);
        }
        if let Some(rest) = text.strip_prefix('-') {
            if is_decimal(rest) {
                return err(column, DesignationErrorKind::NegativeWeight(text));
            }
        }
        if !is_decimal(&text) {
            return match text.chars().position(|c| !(c.is_ascii_digit() || c == '.')) {
                Some(0) if text.starts_with('@') => {
                    err(column, DesignationErrorKind::ExpectedWeight)
                }
                _ => err(column, DesignationErrorKind::InvalidWeight(text)),
            };
        }
        // is_decimal guarantees this parses
        Ok(Weight::Value(text.parse().expect("decimal literal")))
    }
}

fn is_decimal(s: &str) -> bool {
    let mut digits = 0;
    let mut dots = 0;
    for c in s.chars() {
        match c {
            '0'..='9' => digits += 1,
            '.' => dots += 1,
            _ => return false,
        }
    }
    digits > 0 && dots <= 1
}

impl Designation {
    pub fn parse(text: &str) -> Result<Self, DesignationError> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return err(1, DesignationErrorKind::Empty);
        }
        let body = if trimmed == "F" {
            Body::Full
        } else {
            Body::Groups(Parser::new(trimmed).groups()?)
        };
        Ok(Self {
            raw: trimmed.to_string(),
            body,
        })
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// Allele labels named in the designation, in order of appearance.
    pub fn alleles(&self) -> Vec<&str> {
        match &self.body {
            Body::Full => Vec::new(),
            Body::Groups(groups) => groups
                .iter()
                .flat_map(|g| g.alleles.iter().map(|a| a.label.as_str()))
                .collect(),
        }
    }

    /// Binds the designation to a locus and its background frequencies.
    pub fn resolve(&self, b: &AlleleFreqVector) -> Result<AlleleVector, DesignationError> {
        let locus = b.locus();
        let bg = b.probs();
        let groups = match &self.body {
            Body::Full => {
                return Ok(AlleleVector::from_parts_unchecked(
                    locus.clone(),
                    bg.to_vec(),
                ))
            }
            Body::Groups(groups) => groups,
        };

        let mut probs = vec![0.0; locus.k()];
        let mut seen = vec![false; locus.k()];
        let mut numeric = 0.0;
        let mut background_members = Vec::new();
        for group in groups {
            for allele in &group.alleles {
                let i = locus
                    .index_of(&allele.label)
                    .ok_or_else(|| DesignationError {
                        column: allele.column,
                        kind: DesignationErrorKind::UnknownAllele(allele.label.clone()),
                    })?;
                if std::mem::replace(&mut seen[i], true) {
                    return err(
                        allele.column,
                        DesignationErrorKind::DuplicateAllele(allele.label.clone()),
                    );
                }
                match group.weight {
                    Some(Weight::Value(w)) => {
                        probs[i] = w;
                        numeric += w;
                    }
                    Some(Weight::Background) | None => background_members.push(i),
                }
            }
        }

        let bare_single =
            groups.len() == 1 && groups[0].weight.is_none() && groups[0].alleles.len() == 1;
        if bare_single {
            probs[background_members[0]] = 1.0;
            return Ok(AlleleVector::from_parts_unchecked(locus.clone(), probs));
        }

        let end = self.raw.chars().count();
        if numeric > 1.0 + SUM_TOLERANCE {
            return err(end, DesignationErrorKind::WeightsExceedOne(numeric));
        }
        if background_members.is_empty() {
            if numeric < 1.0 - SHORTHAND_DEFICIT {
                return err(end, DesignationErrorKind::WeightsBelowOne(numeric));
            }
            probs.iter_mut().for_each(|p| *p /= numeric);
        } else {
            let residual = (1.0 - numeric).max(0.0);
            let mass: f64 = background_members.iter().map(|&i| bg[i]).sum();
            if residual > SUM_TOLERANCE && mass <= 0.0 {
                return err(end, DesignationErrorKind::NoBackgroundMass);
            }
            if mass > 0.0 {
                for &i in &background_members {
                    probs[i] = residual * bg[i] / mass;
                }
            }
        }
        Ok(AlleleVector::from_parts_unchecked(locus.clone(), probs))
    }
}

/// A designation string together with its resolved allele vector.
#[derive(Clone, Debug, PartialEq)]
pub struct AlleleDesignation {
    raw: String,
    resolved: AlleleVector,
}

impl AlleleDesignation {
    pub fn new(text: &str, b: &AlleleFreqVector) -> Result<Self> {
        let resolved = parse_designation(text, b)?;
        Ok(Self {
            raw: text.trim().to_string(),
            resolved,
        })
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn resolved(&self) -> &AlleleVector {
        &self.resolved
    }
}

/// Parses `text` and resolves it against the background frequencies `b`.
pub fn parse_designation(text: &str, b: &AlleleFreqVector) -> Result<AlleleVector> {
    Designation::parse(text)
        .and_then(|d| d.resolve(b))
        .map_err(|source| Error::Designation {
            text: text.to_string(),
            source,
        })
}
