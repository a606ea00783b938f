//! Batch comparison of profiles under several hypotheses at once.
//!
//! Every candidate is scored independently on a rayon pool of the requested
//! size; results are gathered in input order and then sorted, so output does
//! not depend on the number of workers.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freqs::FrequencySet;
use crate::likelihood::{multi_locus_lr, CoancestryParams, Hypothesis, MultiLocusLr, MutationSet};
use crate::relatedness::Relationship;

use super::{ProfileStore, ResolvedProfile};

#[derive(Clone, Debug)]
pub struct SearchQuery {
    /// Conditioning profile; candidates are transformed into its relatives.
    pub profile: ResolvedProfile,
    pub hypotheses: Vec<Hypothesis>,
    pub theta: CoancestryParams,
    pub min_lr: f64,
    pub top_k: usize,
}

impl SearchQuery {
    pub fn new(profile: ResolvedProfile, hypotheses: Vec<Hypothesis>) -> Self {
        Self {
            profile,
            hypotheses,
            theta: CoancestryParams::NONE,
            min_lr: 0.0,
            top_k: usize::MAX,
        }
    }

    fn validate(&self, mutation: Option<&MutationSet>) -> Result<()> {
        check_hypotheses(&self.hypotheses, mutation)?;
        if self.top_k == 0 {
            return Err(Error::InvalidQuery("top_k must be at least 1".into()));
        }
        check_min_lr(self.min_lr)
    }
}

fn check_min_lr(min_lr: f64) -> Result<()> {
    if min_lr.is_nan() || min_lr < 0.0 {
        return Err(Error::InvalidQuery(format!(
            "min_lr must be >= 0, got {min_lr}"
        )));
    }
    Ok(())
}

fn check_hypotheses(hypotheses: &[Hypothesis], mutation: Option<&MutationSet>) -> Result<()> {
    if hypotheses.is_empty() {
        return Err(Error::InvalidQuery("no hypotheses given".into()));
    }
    for h in hypotheses {
        if !h.mutation {
            continue;
        }
        if h.relationship == Relationship::FullSibling {
            return Err(Error::SiblingMutation);
        }
        if mutation.is_none() {
            return Err(Error::InvalidQuery(format!(
                "hypothesis {h} asks for mutation but no mutation model was given"
            )));
        }
    }
    Ok(())
}

/// Multi-locus LRs for one pair of profiles, one per hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub per_hypothesis: Vec<MultiLocusLr>,
    /// Index of the hypothesis with the largest LR (first on ties).
    pub best: usize,
}

impl Comparison {
    pub fn best_log10(&self) -> f64 {
        self.per_hypothesis[self.best].log10
    }

    pub fn best_lr(&self) -> f64 {
        self.per_hypothesis[self.best].lr()
    }

    pub fn shared_loci(&self) -> usize {
        self.per_hypothesis[0].shared_loci()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub candidate: String,
    pub comparison: Comparison,
}

/// A comparison that could not be scored. `right` is set for pairs from a
/// cross search.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateError {
    pub id: String,
    pub right: Option<String>,
    pub message: String,
    pub undefined_lr: bool,
}

impl CandidateError {
    fn new(id: &str, right: Option<&str>, err: &Error) -> Self {
        Self {
            id: id.to_string(),
            right: right.map(str::to_string),
            message: err.to_string(),
            undefined_lr: err.is_undefined_lr(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchReport {
    pub hypotheses: Vec<Hypothesis>,
    pub results: Vec<SearchResult>,
    /// Candidates sharing no locus with the query.
    pub skipped: Vec<String>,
    pub errors: Vec<CandidateError>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossResult {
    pub left: String,
    pub right: String,
    pub comparison: Comparison,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossReport {
    pub hypotheses: Vec<Hypothesis>,
    pub results: Vec<CrossResult>,
    pub skipped: Vec<(String, String)>,
    pub errors: Vec<CandidateError>,
}

enum Outcome {
    Scored(Comparison),
    Skipped,
    Failed(Error),
}

struct Settings<'a> {
    hypotheses: &'a [Hypothesis],
    freqs: &'a FrequencySet,
    theta: CoancestryParams,
    mutation: Option<&'a MutationSet>,
}

fn compare(first: &ResolvedProfile, second: &ResolvedProfile, s: &Settings<'_>) -> Outcome {
    let mut per_hypothesis = Vec::with_capacity(s.hypotheses.len());
    for h in s.hypotheses {
        let mutation = s.mutation.filter(|_| h.mutation);
        match multi_locus_lr(first, second, h.relationship, s.freqs, s.theta, mutation) {
            Ok(m) => per_hypothesis.push(m),
            Err(Error::NoSharedLoci { .. }) => return Outcome::Skipped,
            Err(e) => return Outcome::Failed(e),
        }
    }
    let mut best = 0;
    for (i, m) in per_hypothesis.iter().enumerate() {
        if m.log10 > per_hypothesis[best].log10 {
            best = i;
        }
    }
    Outcome::Scored(Comparison {
        per_hypothesis,
        best,
    })
}

fn passes(c: &Comparison, min_lr: f64) -> bool {
    c.best_log10() >= min_lr.log10()
}

fn by_lr_desc(a: &Comparison, b: &Comparison) -> Ordering {
    b.best_log10().total_cmp(&a.best_log10())
}

/// Runs `f` on a pool of `workers` threads; 0 means rayon's default.
fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidQuery(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// One-to-many search of `candidates` for relatives of the query.
pub fn search(
    query: &SearchQuery,
    candidates: &[ResolvedProfile],
    freqs: &FrequencySet,
    mutation: Option<&MutationSet>,
    workers: usize,
) -> Result<SearchReport> {
    query.validate(mutation)?;
    let outcomes = with_pool(workers, || score(query, candidates, freqs, mutation))?;
    Ok(collect(
        query,
        candidates.iter().map(|c| c.id()),
        outcomes,
        Vec::new(),
    ))
}

/// [`search`] over a store, resolving candidates on the same pool. A
/// candidate that fails to resolve is reported as an error.
pub fn search_store(
    query: &SearchQuery,
    store: &ProfileStore,
    freqs: &FrequencySet,
    mutation: Option<&MutationSet>,
    workers: usize,
) -> Result<SearchReport> {
    query.validate(mutation)?;
    let (resolved, outcomes, errors) = with_pool(workers, || {
        let mut resolved = Vec::with_capacity(store.len());
        let mut errors = Vec::new();
        for (p, r) in store.profiles().iter().zip(store.resolve_all(freqs)) {
            match r {
                Ok(r) => resolved.push(r),
                Err(e) => errors.push(CandidateError::new(&p.id, None, &e)),
            }
        }
        let outcomes = score(query, &resolved, freqs, mutation);
        (resolved, outcomes, errors)
    })?;
    Ok(collect(
        query,
        resolved.iter().map(|c| c.id()),
        outcomes,
        errors,
    ))
}

fn score(
    query: &SearchQuery,
    candidates: &[ResolvedProfile],
    freqs: &FrequencySet,
    mutation: Option<&MutationSet>,
) -> Vec<Outcome> {
    let settings = Settings {
        hypotheses: &query.hypotheses,
        freqs,
        theta: query.theta,
        mutation,
    };
    candidates
        .par_iter()
        .map(|c| compare(&query.profile, c, &settings))
        .collect()
}

fn collect<'a>(
    query: &SearchQuery,
    ids: impl Iterator<Item = &'a str>,
    outcomes: Vec<Outcome>,
    mut errors: Vec<CandidateError>,
) -> SearchReport {
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for (id, outcome) in ids.zip(outcomes) {
        match outcome {
            Outcome::Scored(c) if passes(&c, query.min_lr) => results.push(SearchResult {
                candidate: id.to_string(),
                comparison: c,
            }),
            Outcome::Scored(_) => {}
            Outcome::Skipped => skipped.push(id.to_string()),
            Outcome::Failed(e) => errors.push(CandidateError::new(id, None, &e)),
        }
    }
    results.sort_by(|a, b| {
        by_lr_desc(&a.comparison, &b.comparison).then_with(|| a.candidate.cmp(&b.candidate))
    });
    results.truncate(query.top_k);
    skipped.sort();
    errors.sort_by(|a, b| a.id.cmp(&b.id));
    SearchReport {
        hypotheses: query.hypotheses.clone(),
        results,
        skipped,
        errors,
    }
}

/// Many-to-many comparison of every `(a, b)` pair, `a` conditioning. Pairs
/// are ordered by `a` id, then `b` id.
#[allow(clippy::too_many_arguments)]
pub fn cross_search(
    left: &[ResolvedProfile],
    right: &[ResolvedProfile],
    hypotheses: &[Hypothesis],
    theta: CoancestryParams,
    min_lr: f64,
    freqs: &FrequencySet,
    mutation: Option<&MutationSet>,
    workers: usize,
) -> Result<CrossReport> {
    check_hypotheses(hypotheses, mutation)?;
    check_min_lr(min_lr)?;
    let settings = Settings {
        hypotheses,
        freqs,
        theta,
        mutation,
    };
    let pairs: Vec<(&ResolvedProfile, &ResolvedProfile)> = left
        .iter()
        .flat_map(|a| right.iter().map(move |b| (a, b)))
        .collect();
    let outcomes: Vec<Outcome> = with_pool(workers, || {
        pairs
            .par_iter()
            .map(|(a, b)| compare(a, b, &settings))
            .collect()
    })?;

    let mut results = Vec::new();
    let mut skipped = Vec::new();
    let mut errors = Vec::new();
    for ((a, b), outcome) in pairs.into_iter().zip(outcomes) {
        match outcome {
            Outcome::Scored(c) if passes(&c, min_lr) => results.push(CrossResult {
                left: a.id().to_string(),
                right: b.id().to_string(),
                comparison: c,
            }),
            Outcome::Scored(_) => {}
            Outcome::Skipped => skipped.push((a.id().to_string(), b.id().to_string())),
            Outcome::Failed(e) => errors.push(CandidateError::new(a.id(), Some(b.id()), &e)),
        }
    }
    results.sort_by(|x, y| (&x.left, &x.right).cmp(&(&y.left, &y.right)));
    skipped.sort();
    errors.sort_by(|x, y| (&x.id, &x.right).cmp(&(&y.id, &y.right)));
    Ok(CrossReport {
        hypotheses: hypotheses.to_vec(),
        results,
        skipped,
        errors,
    })
}

fn csv_error(e: csv::Error) -> Error {
    Error::Csv(e)
}

fn summary_fields(c: &Comparison, hypotheses: &[Hypothesis]) -> Vec<String> {
    let mut row = vec![
        hypotheses[c.best].to_string(),
        c.best_lr().to_string(),
        c.best_log10().to_string(),
        c.shared_loci().to_string(),
    ];
    for m in &c.per_hypothesis {
        row.push(m.lr().to_string());
        row.push(m.log10.to_string());
    }
    row
}

fn hypothesis_columns(hypotheses: &[Hypothesis]) -> Vec<String> {
    let mut cols: Vec<String> = ["best_hypothesis", "best_lr", "best_log10", "shared_loci"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for h in hypotheses {
        cols.push(format!("lr_{h}"));
        cols.push(format!("log10_{h}"));
    }
    cols
}

/// Ranked results as CSV, numbers at full round-trip precision.
pub fn write_search_csv(report: &SearchReport, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["rank".to_string(), "candidate".to_string()];
    header.extend(hypothesis_columns(&report.hypotheses));
    w.write_record(&header).map_err(csv_error)?;
    for (rank, r) in report.results.iter().enumerate() {
        let mut row = vec![(rank + 1).to_string(), r.candidate.clone()];
        row.extend(summary_fields(&r.comparison, &report.hypotheses));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Cross-search pairs as CSV.
pub fn write_cross_csv(report: &CrossReport, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["left".to_string(), "right".to_string()];
    header.extend(hypothesis_columns(&report.hypotheses));
    w.write_record(&header).map_err(csv_error)?;
    for r in &report.results {
        let mut row = vec![r.left.clone(), r.right.clone()];
        row.extend(summary_fields(&r.comparison, &report.hypotheses));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::locus::{AlleleFreqVector, Locus};
    use crate::profile::{parse_profiles, resolve_profile};

    fn freqs() -> FrequencySet {
        let l = Arc::new(
            Locus::new(
                "D1",
                ["8", "9", "10", "11"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            )
            .unwrap(),
        );
        let m = Arc::new(Locus::new("D2", vec!["5".into(), "6".into()]).unwrap());
        FrequencySet::from_vectors([
            AlleleFreqVector::new(l, vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
            AlleleFreqVector::new(m, vec![0.5, 0.5]).unwrap(),
        ])
    }

    fn resolve(text: &str, f: &FrequencySet) -> Vec<ResolvedProfile> {
        parse_profiles(text, "t")
            .unwrap()
            .iter()
            .map(|p| resolve_profile(p, f).unwrap())
            .collect()
    }

    const STORE: &str = "\
PROFILE bob
LOCUS D1 VEC 8 VEC 9

PROFILE carol
LOCUS D1 VEC 10 VEC 11

PROFILE dave
LOCUS D2 VEC 5 VEC 6

PROFILE erin
LOCUS D1 VEC 8 VEC 9
";

    fn hyps() -> Vec<Hypothesis> {
        vec![
            Hypothesis::new(Relationship::Same),
            Hypothesis::new(Relationship::FullSibling),
        ]
    }

    #[test]
    fn alice_against_small_store() {
        let f = freqs();
        let alice = resolve("PROFILE alice\nLOCUS D1 VEC 8 VEC F\n", &f).remove(0);
        let store = resolve(STORE, &f);
        let query = SearchQuery::new(alice, hyps());
        let report = search(&query, &store, &f, None, 2).unwrap();
        assert_eq!(report.skipped, vec!["dave"]);
        assert!(report.errors.is_empty());
        let ids: Vec<&str> = report
            .results
            .iter()
            .map(|r| r.candidate.as_str())
            .collect();
        // bob and erin tie; id order breaks it
        assert_eq!(ids, vec!["bob", "erin", "carol"]);
        let bob = &report.results[0].comparison;
        // same-source beats sibling for this pair: 5 vs 3
        assert_eq!(bob.best, 0);
        assert!((bob.best_lr() - 5.0).abs() < 1e-12);
        assert!((bob.per_hypothesis[1].lr() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn thresholds_and_top_k() {
        let f = freqs();
        let alice = resolve("PROFILE alice\nLOCUS D1 VEC 8 VEC F\n", &f).remove(0);
        let store = resolve(STORE, &f);
        let mut query = SearchQuery::new(alice, hyps());
        query.min_lr = 1e6;
        assert!(search(&query, &store, &f, None, 1)
            .unwrap()
            .results
            .is_empty());
        query.min_lr = 0.0;
        query.top_k = 1;
        assert_eq!(
            search(&query, &store, &f, None, 1).unwrap().results.len(),
            1
        );
        query.top_k = 0;
        assert!(search(&query, &store, &f, None, 1).is_err());
    }

    #[test]
    fn invalid_hypotheses() {
        let f = freqs();
        let alice = resolve("PROFILE alice\nLOCUS D1 VEC 8 VEC F\n", &f).remove(0);
        let mut h = Hypothesis::new(Relationship::Degree(1));
        h.mutation = true;
        let query = SearchQuery::new(alice.clone(), vec![h]);
        assert!(search(&query, &[], &f, None, 1).is_err());
        let query = SearchQuery::new(alice, vec![]);
        assert!(search(&query, &[], &f, None, 1).is_err());
    }

    #[test]
    fn undefined_lr_is_collected() {
        let l = Arc::new(Locus::new("D1", vec!["8".into(), "9".into()]).unwrap());
        let f = FrequencySet::from_vectors([AlleleFreqVector::new(l, vec![1.0, 0.0]).unwrap()]);
        let text = "PROFILE q\nLOCUS D1 VEC 9 VEC 9\n\nPROFILE c\nLOCUS D1 VEC 9 VEC 9\n\nPROFILE d\nLOCUS D1 VEC 8 VEC 8\n";
        let ps = resolve(text, &f);
        let query = SearchQuery::new(ps[0].clone(), vec![Hypothesis::new(Relationship::Same)]);
        let report = search(&query, &ps[1..], &f, None, 1).unwrap();
        assert_eq!(report.errors.len(), 1);
        assert!(report.errors[0].undefined_lr);
        assert_eq!(report.results.len(), 1);
    }

    #[test]
    fn cross_self_pairs_and_csv() {
        let f = freqs();
        let store = resolve(STORE, &f);
        let hyps = [Hypothesis::new(Relationship::Same)];
        let report = cross_search(
            &store,
            &store,
            &hyps,
            CoancestryParams::NONE,
            1.0,
            &f,
            None,
            2,
        )
        .unwrap();
        let pairs: Vec<(&str, &str)> = report
            .results
            .iter()
            .map(|r| (r.left.as_str(), r.right.as_str()))
            .collect();
        assert_eq!(
            pairs,
            vec![
                ("bob", "bob"),
                ("bob", "erin"),
                ("carol", "carol"),
                ("dave", "dave"),
                ("erin", "bob"),
                ("erin", "erin")
            ]
        );
        let none = cross_search(
            &store,
            &store,
            &hyps,
            CoancestryParams::NONE,
            f64::INFINITY,
            &f,
            None,
            1,
        )
        .unwrap();
        assert!(none.results.is_empty());

        let mut buf = Vec::new();
        write_cross_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "left,right,best_hypothesis,best_lr,best_log10,shared_loci,lr_same,log10_same"
        );
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        let lr: f64 = first[3].parse().unwrap();
        assert!((lr - report.results[0].comparison.best_lr()).abs() < 1e-9);
    }
}
