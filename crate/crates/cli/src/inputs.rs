//! Loading frequency tables and profiles named on the command line.

use std::path::{Path, PathBuf};

use gpm_core::encoding::Designation;
use gpm_core::profile::{parse_profiles, resolve_profile, Profile, ProfileStore, ResolvedProfile};
use gpm_core::{Error, FrequencySet};

use crate::Failure;

/// A profile file or store directory, optionally narrowed to one id with
/// `path#id`.
#[derive(Clone, Debug)]
pub struct ProfileRef {
    pub path: PathBuf,
    pub id: Option<String>,
}

impl std::str::FromStr for ProfileRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.is_empty() {
            return Err("empty profile reference".into());
        }
        if Path::new(s).exists() {
            return Ok(Self {
                path: s.into(),
                id: None,
            });
        }
        match s.rsplit_once('#') {
            Some((path, id)) if !path.is_empty() && !id.is_empty() => Ok(Self {
                path: path.into(),
                id: Some(id.to_string()),
            }),
            _ => Ok(Self {
                path: s.into(),
                id: None,
            }),
        }
    }
}

impl std::fmt::Display for ProfileRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.path.display())?;
        if let Some(id) = &self.id {
            write!(f, "#{id}")?;
        }
        Ok(())
    }
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Data(Error::io(path, e)))
}

/// All profiles in a file or store directory.
pub fn load_all(path: &Path) -> Result<Vec<Profile>, Failure> {
    if path.is_dir() {
        Ok(ProfileStore::open(path)?.profiles().to_vec())
    } else {
        Ok(parse_profiles(
            &read_text(path)?,
            &path.display().to_string(),
        )?)
    }
}

/// The single profile a reference points at.
pub fn load_one(r: &ProfileRef) -> Result<Profile, Failure> {
    let profiles = load_all(&r.path)?;
    match &r.id {
        Some(id) => profiles
            .into_iter()
            .find(|p| &p.id == id)
            .ok_or_else(|| Failure::Input(format!("no profile {id:?} in {}", r.path.display()))),
        None if profiles.len() == 1 => Ok(profiles.into_iter().next().unwrap()),
        None => Err(Failure::Input(format!(
            "{} holds {} profiles; name one as {}#<id>",
            r.path.display(),
            profiles.len(),
            r.path.display()
        ))),
    }
}

pub fn load_freqs(path: &Path) -> Result<FrequencySet, Failure> {
    Ok(FrequencySet::from_path(path)?)
}

/// With a floor, alleles missing from the table are added at that
/// frequency; without one they stay errors at resolution time.
pub fn apply_floor<'a>(
    freqs: &mut FrequencySet,
    floor: Option<f64>,
    alleles: impl IntoIterator<Item = (&'a str, String)>,
) -> Result<(), Failure> {
    let Some(floor) = floor else {
        return Ok(());
    };
    for (locus, allele) in alleles {
        if freqs.get(locus).is_some() {
            freqs.add_floor_allele(locus, &allele, floor)?;
        }
    }
    Ok(())
}

pub fn profile_alleles(profiles: &[Profile]) -> Vec<(&str, String)> {
    profiles
        .iter()
        .flat_map(|p| {
            p.loci.iter().flat_map(|(locus, entry)| {
                entry
                    .alleles()
                    .into_iter()
                    .map(move |a| (locus.as_str(), a))
            })
        })
        .collect()
}

pub fn designation_alleles<'a>(locus: &'a str, texts: &[String]) -> Vec<(&'a str, String)> {
    texts
        .iter()
        .filter_map(|t| Designation::parse(t).ok())
        .flat_map(|d| {
            d.alleles()
                .into_iter()
                .map(str::to_string)
                .collect::<Vec<_>>()
        })
        .map(|a| (locus, a))
        .collect()
}

pub fn resolve(p: &Profile, freqs: &FrequencySet) -> Result<ResolvedProfile, Failure> {
    Ok(resolve_profile(p, freqs)?)
}
