//! `gpm`: encode uncertain genotypes, compare profiles and search stores.

mod inputs;
mod output;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gpm_core::encoding::{contributor_gpm, AlleleDesignation, ContributorEncoding, ContributorTag};
use gpm_core::likelihood::{
    multi_locus_lr, CoancestryParams, Hypothesis, MultiLocusLr, MutationModel, MutationSet,
};
use gpm_core::profile::{
    cross_search, search_store, write_cross_csv, write_search_csv, Comparison, ProfileStore,
    SearchQuery,
};
use gpm_core::relatedness::{rel_transform, Relationship, RelationshipSpec};
use gpm_core::{Error, FrequencySet, Gpm};

use inputs::ProfileRef;
use output::{gpm_table, sig6, strings, upper_cells, vector_row, Table};

#[derive(Parser)]
#[command(
    name = "gpm",
    version,
    about = "Genotype probability matrix comparisons"
)]
struct Cli {
    /// Allele frequency table (`locus,allele,frequency`).
    #[arg(long, env = "GPM_FREQS", global = true)]
    freqs: Option<PathBuf>,

    /// Add alleles missing from the frequency table at this frequency
    /// instead of rejecting them.
    #[arg(long, global = true, value_parser = parse_floor)]
    min_freq: Option<f64>,

    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve allele designations into allele vectors and a GPM.
    Encode {
        /// Locus name; may be omitted when the table has a single locus.
        #[arg(long)]
        locus: Option<String>,
        /// Allele designation, given twice (one contributor) or four times.
        #[arg(long = "vec", required = true, allow_hyphen_values = true)]
        vecs: Vec<String>,
        /// Contributor tag for each designation: major, minor or either.
        #[arg(long = "tag", value_parser = parse_tag)]
        tags: Vec<ContributorTag>,
    },
    /// Likelihood ratio between two profiles.
    Lr {
        /// First profile (`path` or `path#id`); conditioning profile under
        /// coancestry.
        first: ProfileRef,
        /// Second profile, whose relative the first is hypothesized to be.
        second: ProfileRef,
        #[arg(long, short = 'r', default_value = "same", value_parser = parse_relationship)]
        relationship: Relationship,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// GPMs of a relative of a profiled individual.
    Relative {
        profile: ProfileRef,
        #[arg(long, short = 'r', value_parser = parse_relationship)]
        relationship: Relationship,
        #[command(flatten)]
        mutation: MutationArgs,
    },
    /// Rank the profiles of a store against a query.
    Search {
        query: ProfileRef,
        #[arg(long)]
        store: PathBuf,
        #[command(flatten)]
        batch: BatchArgs,
        /// Keep only the best N candidates.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        top: Option<u64>,
    },
    /// Add profile files to a store, creating it if needed.
    Import {
        #[arg(long)]
        store: PathBuf,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Compare every profile of one file or store with every profile of
    /// another.
    Cross {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        batch: BatchArgs,
    },
}

#[derive(Args)]
struct MutationArgs {
    /// Per-generation mutation rate; enables stepwise mutation for degree
    /// relationships.
    #[arg(long, value_parser = parse_rate)]
    mutation_rate: Option<f64>,
    /// Share of mutations that add a repeat.
    #[arg(long, default_value_t = 0.5, value_parser = parse_unit, requires = "mutation_rate")]
    mutation_up: f64,
}

#[derive(Args)]
struct ModelArgs {
    /// Coancestry coefficient.
    #[arg(long, default_value_t = 0.0, value_parser = parse_theta)]
    theta: f64,
    #[command(flatten)]
    mutation: MutationArgs,
}

#[derive(Args)]
struct BatchArgs {
    /// Hypotheses to evaluate, comma separated or repeated.
    #[arg(
        long = "hypothesis",
        short = 'H',
        value_delimiter = ',',
        default_value = "same",
        value_parser = parse_relationship
    )]
    hypotheses: Vec<Relationship>,
    #[command(flatten)]
    model: ModelArgs,
    /// Drop pairs whose best LR is below this value.
    #[arg(long, default_value_t = 0.0, value_parser = parse_min_lr)]
    min_lr: f64,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn parse_relationship(s: &str) -> Result<Relationship, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_tag(s: &str) -> Result<ContributorTag, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_number(s: &str) -> Result<f64, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("{s:?} is not a number"))
}

fn in_range(s: &str, ok: impl Fn(f64) -> bool, expected: &str) -> Result<f64, String> {
    let x = parse_number(s)?;
    if ok(x) {
        Ok(x)
    } else {
        Err(format!("{x} is outside {expected}"))
    }
}

fn parse_theta(s: &str) -> Result<f64, String> {
    in_range(s, |x| (0.0..1.0).contains(&x), "[0, 1)")
}

fn parse_rate(s: &str) -> Result<f64, String> {
    in_range(s, |x| (0.0..1.0).contains(&x), "[0, 1)")
}

fn parse_unit(s: &str) -> Result<f64, String> {
    in_range(s, |x| (0.0..=1.0).contains(&x), "[0, 1]")
}

fn parse_floor(s: &str) -> Result<f64, String> {
    in_range(s, |x| x > 0.0 && x < 1.0, "(0, 1)")
}

fn parse_min_lr(s: &str) -> Result<f64, String> {
    in_range(s, |x| x >= 0.0, "[0, inf]")
}

/// Why a command failed, which picks the exit status.
pub enum Failure {
    /// Bad invocation: exit 1.
    Usage(String),
    /// Unusable input data: exit 2.
    Input(String),
    /// Library error: exit 3 for an undefined LR, else 2.
    Data(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SiblingMutation => Failure::Usage(e.to_string()),
            e => Failure::Data(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = run(cli, &mut out).and_then(|()| out.flush().map_err(Failure::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(failure) => {
            let _ = out.flush();
            let (code, message) = match failure {
                Failure::Usage(m) => (1, m),
                Failure::Input(m) => (2, m),
                Failure::Data(e) => (if e.is_undefined_lr() { 3 } else { 2 }, e.to_string()),
                Failure::Io(e) => (2, e.to_string()),
            };
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli, out: &mut impl Write) -> Result<(), Failure> {
    let Some(freqs_path) = cli.freqs else {
        return Err(Failure::Usage(
            "no frequency table: pass --freqs <path> or set GPM_FREQS".into(),
        ));
    };
    let mut freqs = inputs::load_freqs(&freqs_path)?;
    let floor = cli.min_freq;
    let format = cli.format;
    match cli.command {
        Command::Encode { locus, vecs, tags } => {
            let locus = match locus {
                Some(l) => l,
                None if freqs.len() == 1 => freqs.locus_names().next().unwrap().to_string(),
                None => {
                    return Err(Failure::Usage(
                        "--locus is required when the frequency table has several loci".into(),
                    ))
                }
            };
            inputs::apply_floor(
                &mut freqs,
                floor,
                inputs::designation_alleles(&locus, &vecs),
            )?;
            encode(&freqs, &locus, &vecs, tags, format, out)
        }
        Command::Lr {
            first,
            second,
            relationship,
            model,
        } => {
            let (a, b) = (inputs::load_one(&first)?, inputs::load_one(&second)?);
            let both = [a, b];
            inputs::apply_floor(&mut freqs, floor, inputs::profile_alleles(&both))?;
            let mutation = mutation_set(&freqs, &model.mutation, relationship)?;
            let theta = CoancestryParams::new(model.theta)?;
            let a = inputs::resolve(&both[0], &freqs)?;
            let b = inputs::resolve(&both[1], &freqs)?;
            let lr = multi_locus_lr(&a, &b, relationship, &freqs, theta, mutation.as_ref())?;
            let hypothesis = Hypothesis {
                relationship,
                mutation: mutation.is_some(),
            };
            write_lr(&lr, hypothesis, model.theta, format, out)
        }
        Command::Relative {
            profile,
            relationship,
            mutation,
        } => {
            let p = inputs::load_one(&profile)?;
            let ps = [p];
            inputs::apply_floor(&mut freqs, floor, inputs::profile_alleles(&ps))?;
            let mutation = mutation_set(&freqs, &mutation, relationship)?;
            let resolved = inputs::resolve(&ps[0], &freqs)?;
            let mut relatives = Vec::new();
            for (name, g) in resolved.loci() {
                let lf = freqs.require(name)?;
                let spec = match mutation.as_ref().and_then(|m| m.get(name)) {
                    Some(m) => RelationshipSpec::with_mutation(relationship, m)?,
                    None => RelationshipSpec::new(relationship),
                };
                relatives.push(rel_transform(g, &spec, lf.freqs())?);
            }
            write_gpms(&relatives, format, out)
        }
        Command::Search {
            query,
            store,
            batch,
            top,
        } => {
            let q = inputs::load_one(&query)?;
            let store = ProfileStore::open(&store)?;
            let mut everything = vec![q];
            everything.extend(store.profiles().iter().cloned());
            inputs::apply_floor(&mut freqs, floor, inputs::profile_alleles(&everything))?;
            let mutation = batch_mutation(&freqs, &batch)?;
            let mut sq = SearchQuery::new(
                inputs::resolve(&everything[0], &freqs)?,
                hypotheses(&batch, mutation.is_some()),
            );
            sq.theta = CoancestryParams::new(batch.model.theta)?;
            sq.min_lr = batch.min_lr;
            sq.top_k = top.map_or(usize::MAX, |t| t as usize);
            let report = search_store(&sq, &store, &freqs, mutation.as_ref(), batch.workers)?;
            for id in &report.skipped {
                eprintln!("note: {id} shares no loci with the query");
            }
            for e in &report.errors {
                eprintln!("warning: {}: {}", e.id, e.message);
            }
            match format {
                Format::Csv => write_search_csv(&report, out)?,
                Format::Table => {
                    let mut t =
                        Table::new(summary_header(&["rank", "candidate"], &report.hypotheses));
                    for (rank, r) in report.results.iter().enumerate() {
                        let lead = vec![(rank + 1).to_string(), r.candidate.clone()];
                        t.push(summary_row(lead, &r.comparison, &report.hypotheses));
                    }
                    t.write(out)?;
                }
            }
            Ok(())
        }
        Command::Import { store, files } => {
            let mut texts = Vec::new();
            for f in &files {
                texts.push((f, inputs::read_text(f)?));
            }
            if floor.is_some() {
                let mut parsed = Vec::new();
                for (f, text) in &texts {
                    parsed.extend(gpm_core::profile::parse_profiles(
                        text,
                        &f.display().to_string(),
                    )?);
                }
                inputs::apply_floor(&mut freqs, floor, inputs::profile_alleles(&parsed))?;
            }
            let mut store = ProfileStore::create(&store)?;
            for (f, text) in &texts {
                let ids = store.import(text, &f.display().to_string(), &freqs)?;
                writeln!(
                    out,
                    "imported {} profile(s) from {}",
                    ids.len(),
                    f.display()
                )?;
                for id in ids {
                    writeln!(out, "  {id}")?;
                }
            }
            Ok(())
        }
        Command::Cross { left, right, batch } => {
            let l = inputs::load_all(&left)?;
            let r = inputs::load_all(&right)?;
            let mut everything = l.clone();
            everything.extend(r.iter().cloned());
            inputs::apply_floor(&mut freqs, floor, inputs::profile_alleles(&everything))?;
            let mutation = batch_mutation(&freqs, &batch)?;
            let resolve_all = |ps: &[gpm_core::profile::Profile]| {
                ps.iter()
                    .map(|p| inputs::resolve(p, &freqs))
                    .collect::<Result<Vec<_>, _>>()
            };
            let (l, r) = (resolve_all(&l)?, resolve_all(&r)?);
            let report = cross_search(
                &l,
                &r,
                &hypotheses(&batch, mutation.is_some()),
                CoancestryParams::new(batch.model.theta)?,
                batch.min_lr,
                &freqs,
                mutation.as_ref(),
                batch.workers,
            )?;
            for (a, b) in &report.skipped {
                eprintln!("note: {a} and {b} share no loci");
            }
            for e in &report.errors {
                let right = e.right.as_deref().unwrap_or("?");
                eprintln!("warning: {} vs {right}: {}", e.id, e.message);
            }
            match format {
                Format::Csv => write_cross_csv(&report, out)?,
                Format::Table => {
                    let mut t = Table::new(summary_header(&["left", "right"], &report.hypotheses));
                    for p in &report.results {
                        let lead = vec![p.left.clone(), p.right.clone()];
                        t.push(summary_row(lead, &p.comparison, &report.hypotheses));
                    }
                    t.write(out)?;
                }
            }
            Ok(())
        }
    }
}

fn build_mutation(
    freqs: &FrequencySet,
    args: &MutationArgs,
) -> Result<Option<MutationSet>, Failure> {
    args.mutation_rate
        .map(|rate| {
            MutationSet::build(
                freqs,
                MutationModel {
                    rate,
                    up_fraction: args.mutation_up,
                },
            )
        })
        .transpose()
        .map_err(Failure::from)
}

/// Mutation for a single requested relationship: rejected for siblings,
/// ignored for the same-source hypothesis.
fn mutation_set(
    freqs: &FrequencySet,
    args: &MutationArgs,
    relationship: Relationship,
) -> Result<Option<MutationSet>, Failure> {
    match relationship {
        Relationship::FullSibling if args.mutation_rate.is_some() => {
            Err(Failure::from(Error::SiblingMutation))
        }
        Relationship::Degree(_) => build_mutation(freqs, args),
        _ => Ok(None),
    }
}

fn batch_mutation(freqs: &FrequencySet, batch: &BatchArgs) -> Result<Option<MutationSet>, Failure> {
    let wants = batch
        .hypotheses
        .iter()
        .any(|h| matches!(h, Relationship::Degree(_)));
    if wants {
        build_mutation(freqs, &batch.model.mutation)
    } else {
        Ok(None)
    }
}

/// Degree hypotheses take the mutation model when one is given; the others
/// never do.
fn hypotheses(batch: &BatchArgs, mutation: bool) -> Vec<Hypothesis> {
    batch
        .hypotheses
        .iter()
        .map(|&relationship| Hypothesis {
            relationship,
            mutation: mutation && matches!(relationship, Relationship::Degree(_)),
        })
        .collect()
}

fn summary_header(lead: &[&str], hypotheses: &[Hypothesis]) -> Vec<String> {
    let mut h: Vec<String> = lead.iter().map(|s| s.to_string()).collect();
    h.extend(strings(["best", "LR", "log10", "loci"]));
    h.extend(hypotheses.iter().map(|x| format!("LR({x})")));
    h
}

fn summary_row(mut row: Vec<String>, c: &Comparison, hypotheses: &[Hypothesis]) -> Vec<String> {
    row.push(hypotheses[c.best].to_string());
    row.push(sig6(c.best_lr()));
    row.push(sig6(c.best_log10()));
    row.push(c.shared_loci().to_string());
    row.extend(c.per_hypothesis.iter().map(|m| sig6(m.lr())));
    row
}

fn encode(
    freqs: &FrequencySet,
    locus: &str,
    vecs: &[String],
    tags: Vec<ContributorTag>,
    format: Format,
    out: &mut impl Write,
) -> Result<(), Failure> {
    let lf = freqs.require(locus)?;
    let designations = vecs
        .iter()
        .map(|v| AlleleDesignation::new(v, lf.freqs()))
        .collect::<Result<Vec<_>, _>>()?;
    let tags = if tags.is_empty() {
        vec![ContributorTag::Either; vecs.len()]
    } else {
        tags
    };
    let enc = ContributorEncoding::new(designations, tags)?;
    let gpms: Vec<(&str, Gpm)> = if enc.contributors() == 1 {
        vec![("single", contributor_gpm(&enc, ContributorTag::Either)?)]
    } else {
        vec![
            ("major", contributor_gpm(&enc, ContributorTag::Major)?),
            ("minor", contributor_gpm(&enc, ContributorTag::Minor)?),
        ]
    };
    let names = ["u", "v", "w", "z"];
    match format {
        Format::Table => {
            let mut header = strings(["vector", "designation"]);
            header.extend(lf.locus().alleles().iter().cloned());
            let mut t = Table::new(header);
            for (name, d) in names.iter().zip(enc.vectors()) {
                t.push(vector_row(name, d.raw(), d.resolved()));
            }
            writeln!(out, "locus {locus}")?;
            t.write(out)?;
            for (name, g) in &gpms {
                writeln!(out)?;
                writeln!(out, "{name} GPM")?;
                gpm_table(g).write(out)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["record", "name", "allele_i", "allele_j", "value"])
                .map_err(csv_failure)?;
            for (name, d) in names.iter().zip(enc.vectors()) {
                for (a, p) in lf.locus().alleles().iter().zip(d.resolved().probs()) {
                    w.write_record(["vector", name, a, "", &p.to_string()])
                        .map_err(csv_failure)?;
                }
            }
            for (name, g) in &gpms {
                for (a, b, cell, _) in upper_cells(g) {
                    w.write_record(["gpm", name, &a, &b, &cell.to_string()])
                        .map_err(csv_failure)?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure::Data(Error::Csv(e))
}

fn write_lr(
    lr: &MultiLocusLr,
    hypothesis: Hypothesis,
    theta: f64,
    format: Format,
    out: &mut impl Write,
) -> Result<(), Failure> {
    match format {
        Format::Table => {
            writeln!(
                out,
                "hypothesis {hypothesis} vs unrelated, theta {}",
                sig6(theta)
            )?;
            let mut t = Table::new(strings([
                "locus",
                "LR",
                "numerator",
                "denominator",
                "log10",
            ]));
            for l in &lr.per_locus {
                t.push(vec![
                    l.locus.clone(),
                    sig6(l.lr),
                    sig6(l.numerator),
                    sig6(l.denominator),
                    sig6(l.log10()),
                ]);
            }
            t.write(out)?;
            if !lr.skipped.is_empty() {
                writeln!(out, "skipped loci: {}", lr.skipped.join(", "))?;
            }
            let n = lr.shared_loci();
            writeln!(
                out,
                "overall LR {} (log10 {}) over {n} shared {}",
                sig6(lr.lr()),
                sig6(lr.log10),
                if n == 1 { "locus" } else { "loci" }
            )?;
        }
        Format::Csv => {
            for l in &lr.skipped {
                eprintln!("note: locus {l} is typed in only one profile");
            }
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["locus", "lr", "numerator", "denominator", "log10"])
                .map_err(csv_failure)?;
            for l in &lr.per_locus {
                w.write_record([
                    l.locus.clone(),
                    l.lr.to_string(),
                    l.numerator.to_string(),
                    l.denominator.to_string(),
                    l.log10().to_string(),
                ])
                .map_err(csv_failure)?;
            }
            w.write_record([
                "overall",
                &lr.lr().to_string(),
                "",
                "",
                &lr.log10.to_string(),
            ])
            .map_err(csv_failure)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn write_gpms(gpms: &[Gpm], format: Format, out: &mut impl Write) -> Result<(), Failure> {
    match format {
        Format::Table => {
            for (n, g) in gpms.iter().enumerate() {
                if n > 0 {
                    writeln!(out)?;
                }
                writeln!(out, "locus {}", g.locus().name())?;
                gpm_table(g).write(out)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "locus",
                "allele_i",
                "allele_j",
                "cell",
                "genotype_probability",
            ])
            .map_err(csv_failure)?;
            for g in gpms {
                for (a, b, cell, p) in upper_cells(g) {
                    w.write_record([g.locus().name(), &a, &b, &cell.to_string(), &p.to_string()])
                        .map_err(csv_failure)?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}
