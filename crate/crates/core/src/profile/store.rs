use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freqs::FrequencySet;

use super::{import_profiles, parse_profiles, resolve_profile, Profile, ResolvedProfile};

/// Name of the index file inside a store directory.
pub const INDEX_FILE: &str = "index.txt";

/// A directory of profile text files, one profile per file, listed in
/// `index.txt` one filename per line.
#[derive(Clone, Debug)]
pub struct ProfileStore {
    dir: PathBuf,
    files: Vec<String>,
    profiles: Vec<Profile>,
}

impl ProfileStore {
    /// Opens an existing store, or initializes an empty one.
    pub fn create(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let index = dir.join(INDEX_FILE);
        if !index.exists() {
            fs::write(&index, "").map_err(|e| Error::io(&index, e))?;
        }
        Self::open(dir)
    }

    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let index = dir.join(INDEX_FILE);
        if !index.is_file() {
            return Err(Error::Store {
                path: dir,
                message: format!("missing {INDEX_FILE}"),
            });
        }
        let listing = fs::read_to_string(&index).map_err(|e| Error::io(&index, e))?;
        let files: Vec<String> = listing
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        let mut profiles = Vec::new();
        let mut ids = HashSet::new();
        for file in &files {
            let path = dir.join(file);
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            for p in parse_profiles(&text, &path.display().to_string())? {
                if !ids.insert(p.id.clone()) {
                    return Err(Error::DuplicateProfile(p.id));
                }
                profiles.push(p);
            }
        }
        Ok(Self {
            dir,
            files,
            profiles,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Profile> {
        self.profiles.iter().find(|p| p.id == id)
    }

    /// Validates every profile in `text` against `freqs` and the ids
    /// already stored, then writes them. Nothing is written on failure.
    /// Returns the imported ids.
    pub fn import(
        &mut self,
        text: &str,
        source_name: &str,
        freqs: &FrequencySet,
    ) -> Result<Vec<String>> {
        let batch = import_profiles(text, source_name, freqs)?;
        if let Some((p, _)) = batch.iter().find(|(p, _)| self.get(&p.id).is_some()) {
            return Err(Error::DuplicateProfile(p.id.clone()));
        }
        let mut taken: HashSet<String> = self.files.iter().cloned().collect();
        let mut written = Vec::new();
        for (profile, _) in &batch {
            let name = file_name_for(&profile.id, &mut taken, &self.dir);
            let path = self.dir.join(&name);
            fs::write(&path, profile.to_text()).map_err(|e| Error::io(&path, e))?;
            written.push(name);
        }
        let mut files = self.files.clone();
        files.extend(written);
        let index = self.dir.join(INDEX_FILE);
        let tmp = self.dir.join(format!("{INDEX_FILE}.tmp"));
        let listing: String = files.iter().map(|f| format!("{f}\n")).collect();
        fs::write(&tmp, listing).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &index).map_err(|e| Error::io(&index, e))?;

        self.files = files;
        let ids = batch.iter().map(|(p, _)| p.id.clone()).collect();
        self.profiles.extend(batch.into_iter().map(|(p, _)| p));
        Ok(ids)
    }

    /// Resolves every stored profile, in store order. Runs on the current
    /// rayon pool.
    pub fn resolve_all(&self, freqs: &FrequencySet) -> Vec<Result<ResolvedProfile>> {
        self.profiles
            .par_iter()
            .map(|p| resolve_profile(p, freqs))
            .collect()
    }
}

fn file_name_for(id: &str, taken: &mut HashSet<String>, dir: &Path) -> String {
    let mut stem: String = id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect();
    stem = stem.trim_start_matches('.').to_string();
    if stem.is_empty() {
        stem = "profile".into();
    }
    let mut name = format!("{stem}.profile");
    let mut n = 2;
    while taken.contains(&name) || dir.join(&name).exists() {
        name = format!("{stem}-{n}.profile");
        n += 1;
    }
    taken.insert(name.clone());
    name
}
