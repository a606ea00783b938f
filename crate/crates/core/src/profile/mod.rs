//! Multi-locus profiles: text format, resolution to GPMs, storage, search.
//!
//! Profile text format (UTF-8, one directive per line):
//!
//! ```text
//! # comment
//! PROFILE alice
//! META case 2019-004
//! LOCUS D8 VEC 8 VEC F
//! LOCUS TH01 VEC 7 VEC 9.3@0.5/10@B TAG major major
//! LOCUS TH01 VEC 6 VEC 8 TAG minor minor
//! LOCUS FGA GPM
//! CELL 20 20 0.5
//! CELL 20 21 0.25
//!
//! PROFILE bob
//! ...
//! ```
//!
//! A blank line ends a profile. Two `VEC` lines for the same locus make a
//! four-vector, two-contributor encoding; `CONTRIBUTOR major|minor` picks
//! which contributor's GPM the profile stands for (default major). `CELL a b p`
//! sets both `(a, b)` and `(b, a)` to `p`; unlisted cells are zero.

mod search;
mod store;

pub use search::{
    cross_search, search, search_store, write_cross_csv, write_search_csv, CandidateError,
    Comparison, CrossReport, CrossResult, SearchQuery, SearchReport, SearchResult,
};
pub use store::{ProfileStore, INDEX_FILE};

use indexmap::IndexMap;

use crate::encoding::{
    contributor_gpm, AlleleDesignation, ContributorEncoding, ContributorTag, Designation,
};
use crate::error::{Error, Result};
use crate::freqs::FrequencySet;
use crate::gpm::Gpm;

/// One locus of an unresolved profile.
#[derive(Clone, Debug, PartialEq)]
pub enum LocusEntry {
    /// Two or four allele designations with their contributor tags.
    Vectors {
        designations: Vec<String>,
        tags: Vec<ContributorTag>,
    },
    /// Explicit upper-or-lower cells `(allele_i, allele_j, p)`.
    Cells(Vec<(String, String, f64)>),
}

impl LocusEntry {
    /// Allele labels referenced by the entry (background `F` excluded).
    pub fn alleles(&self) -> Vec<String> {
        let mut out: Vec<String> = match self {
            Self::Vectors { designations, .. } => designations
                .iter()
                .filter_map(|d| Designation::parse(d).ok())
                .flat_map(|d| {
                    d.alleles()
                        .into_iter()
                        .map(str::to_string)
                        .collect::<Vec<_>>()
                })
                .collect(),
            Self::Cells(cells) => cells
                .iter()
                .flat_map(|(a, b, _)| [a.clone(), b.clone()])
                .collect(),
        };
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub id: String,
    pub metadata: IndexMap<String, String>,
    pub contributor: ContributorTag,
    pub loci: IndexMap<String, LocusEntry>,
}

impl Profile {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            metadata: IndexMap::new(),
            contributor: ContributorTag::Major,
            loci: IndexMap::new(),
        }
    }

    /// Serializes back to the text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("PROFILE {}\n", self.id);
        for (k, v) in &self.metadata {
            out += &format!("META {k} {v}\n");
        }
        if self.contributor == ContributorTag::Minor {
            out += "CONTRIBUTOR minor\n";
        }
        for (name, entry) in &self.loci {
            match entry {
                LocusEntry::Vectors { designations, tags } => {
                    for (ds, ts) in designations.chunks(2).zip(tags.chunks(2)) {
                        out += &format!("LOCUS {name} VEC {} VEC {}", ds[0], ds[1]);
                        if ts.iter().any(|t| *t != ContributorTag::Either) {
                            out += &format!(" TAG {} {}", ts[0], ts[1]);
                        }
                        out.push('\n');
                    }
                }
                LocusEntry::Cells(cells) => {
                    out += &format!("LOCUS {name} GPM\n");
                    for (a, b, p) in cells {
                        out += &format!("CELL {a} {b} {p}\n");
                    }
                }
            }
        }
        out
    }
}

/// A profile with every locus resolved to a validated GPM.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedProfile {
    id: String,
    loci: IndexMap<String, Gpm>,
}

impl ResolvedProfile {
    pub fn new(id: impl Into<String>, loci: IndexMap<String, Gpm>) -> Self {
        Self {
            id: id.into(),
            loci,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn loci(&self) -> &IndexMap<String, Gpm> {
        &self.loci
    }

    pub fn get(&self, locus: &str) -> Option<&Gpm> {
        self.loci.get(locus)
    }
}

struct ParseState<'a> {
    source_name: &'a str,
    profiles: Vec<Profile>,
    current: Option<Profile>,
    /// Locus whose `CELL` lines are being read.
    open_gpm: Option<String>,
}

impl ParseState<'_> {
    fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::ProfileFormat {
            source_name: self.source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    fn finish(&mut self) {
        self.open_gpm = None;
        if let Some(p) = self.current.take() {
            self.profiles.push(p);
        }
    }

    fn line(&mut self, n: usize, text: &str) -> Result<()> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let keyword = tokens[0].to_ascii_uppercase();
        if keyword == "PROFILE" {
            self.finish();
            if tokens.len() != 2 {
                return Err(self.error(n, "expected `PROFILE <id>`"));
            }
            self.current = Some(Profile::new(tokens[1]));
            return Ok(());
        }
        if self.current.is_none() {
            return Err(self.error(n, format!("{} outside a profile", tokens[0])));
        }
        if keyword != "CELL" {
            self.open_gpm = None;
        }
        match keyword.as_str() {
            "META" => {
                let rest = text.trim_start()[tokens[0].len()..].trim_start();
                let Some((key, value)) = rest.split_once(char::is_whitespace) else {
                    return Err(self.error(n, "expected `META <key> <value>`"));
                };
                let profile = self.current.as_mut().unwrap();
                profile
                    .metadata
                    .insert(key.to_string(), value.trim().to_string());
            }
            "CONTRIBUTOR" => {
                let tag = match tokens.get(1).map(|t| t.parse::<ContributorTag>()) {
                    Some(Ok(t @ (ContributorTag::Major | ContributorTag::Minor)))
                        if tokens.len() == 2 =>
                    {
                        t
                    }
                    _ => return Err(self.error(n, "expected `CONTRIBUTOR major|minor`")),
                };
                self.current.as_mut().unwrap().contributor = tag;
            }
            "LOCUS" => self.locus(n, &tokens)?,
            "CELL" => self.cell(n, &tokens)?,
            _ => return Err(self.error(n, format!("unknown directive {:?}", tokens[0]))),
        }
        Ok(())
    }

    fn locus(&mut self, n: usize, tokens: &[&str]) -> Result<()> {
        let name = *tokens
            .get(1)
            .ok_or_else(|| self.error(n, "expected a locus name after LOCUS"))?;
        let rest = &tokens[2..];
        if rest.len() == 1 && rest[0].eq_ignore_ascii_case("GPM") {
            if self.current.as_ref().unwrap().loci.contains_key(name) {
                return Err(self.error(n, format!("locus {name} given twice")));
            }
            let profile = self.current.as_mut().unwrap();
            profile
                .loci
                .insert(name.to_string(), LocusEntry::Cells(Vec::new()));
            self.open_gpm = Some(name.to_string());
            return Ok(());
        }
        let (designations, tags) =
            match rest {
                [v1, d1, v2, d2] if is_vec(v1, v2) => {
                    ([*d1, *d2], [ContributorTag::Either, ContributorTag::Either])
                }
                [v1, d1, v2, d2, t, t1, t2] if is_vec(v1, v2) && t.eq_ignore_ascii_case("TAG") => {
                    let parse = |s: &str| {
                        s.parse::<ContributorTag>()
                            .map_err(|e| self.error(n, e.to_string()))
                    };
                    ([*d1, *d2], [parse(t1)?, parse(t2)?])
                }
                _ => return Err(self.error(
                    n,
                    "expected `LOCUS <name> GPM` or `LOCUS <name> VEC <d> VEC <d> [TAG <t> <t>]`",
                )),
            };
        let profile = self.current.as_mut().unwrap();
        match profile.loci.get_mut(name) {
            None => {
                profile.loci.insert(
                    name.to_string(),
                    LocusEntry::Vectors {
                        designations: designations.iter().map(|s| s.to_string()).collect(),
                        tags: tags.to_vec(),
                    },
                );
            }
            Some(LocusEntry::Vectors {
                designations: ds,
                tags: ts,
            }) if ds.len() == 2 => {
                ds.extend(designations.iter().map(|s| s.to_string()));
                ts.extend(tags);
            }
            Some(_) => {
                return Err(self.error(
                    n,
                    format!("locus {name}: at most two VEC lines, and not mixed with GPM"),
                ))
            }
        }
        Ok(())
    }

    fn cell(&mut self, n: usize, tokens: &[&str]) -> Result<()> {
        let Some(name) = self.open_gpm.clone() else {
            return Err(self.error(n, "CELL without a preceding `LOCUS <name> GPM`"));
        };
        let [_, a, b, p] = tokens else {
            return Err(self.error(n, "expected `CELL <allele_i> <allele_j> <prob>`"));
        };
        let p: f64 = p
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| self.error(n, format!("invalid probability {p:?}")))?;
        let profile = self.current.as_mut().unwrap();
        let Some(LocusEntry::Cells(cells)) = profile.loci.get_mut(&name) else {
            unreachable!("open GPM locus always holds cells");
        };
        let existing = cells
            .iter()
            .find(|(x, y, _)| (x == a && y == b) || (x == b && y == a))
            .map(|c| c.2);
        match existing {
            Some(q) if q == p => {}
            Some(q) => {
                return Err(self.error(
                    n,
                    format!("cell {a} {b} = {p} conflicts with earlier value {q}"),
                ))
            }
            None => cells.push((a.to_string(), b.to_string(), p)),
        }
        Ok(())
    }
}

fn is_vec(a: &str, b: &str) -> bool {
    a.eq_ignore_ascii_case("VEC") && b.eq_ignore_ascii_case("VEC")
}

/// Parses profile text. `source_name` only labels error messages.
pub fn parse_profiles(text: &str, source_name: &str) -> Result<Vec<Profile>> {
    let mut state = ParseState {
        source_name,
        profiles: Vec::new(),
        current: None,
        open_gpm: None,
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            state.finish();
        } else if !line.starts_with('#') {
            state.line(i + 1, line)?;
        }
    }
    state.finish();
    Ok(state.profiles)
}

fn resolve_entry(
    name: &str,
    entry: &LocusEntry,
    contributor: ContributorTag,
    freqs: &FrequencySet,
) -> Result<Gpm> {
    let lf = freqs.require(name)?;
    match entry {
        LocusEntry::Vectors { designations, tags } => {
            let vectors = designations
                .iter()
                .map(|d| AlleleDesignation::new(d, lf.freqs()))
                .collect::<Result<Vec<_>>>()?;
            let enc = ContributorEncoding::new(vectors, tags.clone())?;
            contributor_gpm(&enc, contributor)
        }
        LocusEntry::Cells(cells) => {
            let locus = lf.locus();
            let k = locus.k();
            let mut matrix = vec![0.0; k * k];
            for (a, b, p) in cells {
                let (i, j) = (locus.require_index(a)?, locus.require_index(b)?);
                matrix[i * k + j] = *p;
                matrix[j * k + i] = *p;
            }
            Gpm::from_cells_normalized(locus.clone(), matrix)
        }
    }
}

/// Resolves every locus through the allele-vector encodings or the
/// explicit cells, with locus context on failure.
pub fn resolve_profile(profile: &Profile, freqs: &FrequencySet) -> Result<ResolvedProfile> {
    let loci = profile
        .loci
        .iter()
        .map(|(name, entry)| {
            resolve_entry(name, entry, profile.contributor, freqs)
                .map(|g| (name.clone(), g))
                .map_err(|e| Error::ProfileLocus {
                    id: profile.id.clone(),
                    locus: name.clone(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<IndexMap<_, _>>>()?;
    Ok(ResolvedProfile::new(profile.id.clone(), loci))
}

/// Parses and resolves a whole file; any failure rejects every profile in
/// it.
pub fn import_profiles(
    text: &str,
    source_name: &str,
    freqs: &FrequencySet,
) -> Result<Vec<(Profile, ResolvedProfile)>> {
    let profiles = parse_profiles(text, source_name)?;
    let mut seen = std::collections::HashSet::new();
    for p in &profiles {
        if !seen.insert(p.id.as_str()) {
            return Err(Error::DuplicateProfile(p.id.clone()));
        }
    }
    profiles
        .into_iter()
        .map(|p| {
            let r = resolve_profile(&p, freqs)?;
            Ok((p, r))
        })
        .collect()
}
