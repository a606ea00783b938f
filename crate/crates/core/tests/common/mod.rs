//! Test-only helpers: a brute-force LR oracle built from genotype-pair
//! enumeration, random GPM generators, and a synthetic profile database.
#![allow(dead_code)]

use std::sync::Arc;

use gpm_core::relatedness::Relationship;
use gpm_core::{AlleleFreqVector, FrequencySet, Gpm, Locus, LocusRef};
use rand::Rng;

pub fn locus(name: &str, labels: &[&str]) -> LocusRef {
    Arc::new(Locus::new(name, labels.iter().map(|s| s.to_string()).collect()).unwrap())
}

pub fn numbered_locus(name: &str, k: usize) -> LocusRef {
    let labels: Vec<String> = (0..k).map(|i| (10 + i).to_string()).collect();
    Arc::new(Locus::new(name, labels).unwrap())
}

pub fn freq(locus: &LocusRef, probs: &[f64]) -> AlleleFreqVector {
    AlleleFreqVector::new(locus.clone(), probs.to_vec()).unwrap()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

/// Unordered genotypes `(i, j)`, `i ≤ j`.
pub fn genotypes(k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect()
}

fn unordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn orderings((i, j): (usize, usize)) -> Vec<(usize, usize)> {
    if i == j {
        vec![(i, i)]
    } else {
        vec![(i, j), (j, i)]
    }
}

/// Hardy-Weinberg probability of an unordered genotype.
pub fn hwe(b: &[f64], (i, j): (usize, usize)) -> f64 {
    if i == j {
        b[i] * b[i]
    } else {
        2.0 * b[i] * b[j]
    }
}

/// Probabilities that two relatives share 0, 1 or 2 alleles identical by
/// descent.
pub fn ibd(rel: Relationship) -> [f64; 3] {
    match rel {
        Relationship::Same => [0.0, 0.0, 1.0],
        Relationship::FullSibling => [0.25, 0.5, 0.25],
        Relationship::Degree(n) => {
            let k1 = 2f64.powi(1 - n as i32);
            [1.0 - k1, k1, 0.0]
        }
    }
}

/// Joint probability of two relatives' genotypes under Hardy-Weinberg
/// equilibrium, summing over which alleles are shared by descent.
pub fn related_joint(b: &[f64], k: [f64; 3], g1: (usize, usize), g2: (usize, usize)) -> f64 {
    let n = b.len();
    let none = hwe(b, g1) * hwe(b, g2);
    let mut one = 0.0;
    for shared in 0..n {
        for other1 in 0..n {
            for other2 in 0..n {
                if unordered(shared, other1) == g1 && unordered(shared, other2) == g2 {
                    one += b[shared] * b[other1] * b[other2];
                }
            }
        }
    }
    let two = if g1 == g2 { hwe(b, g1) } else { 0.0 };
    k[0] * none + k[1] * one + k[2] * two
}

/// Probability of an ordered allele sequence drawn from a Pólya urn with
/// mean `b` and overdispersion `theta`.
pub fn urn(b: &[f64], theta: f64, alleles: &[usize]) -> f64 {
    let mut p = 1.0;
    for (n, &a) in alleles.iter().enumerate() {
        let m = alleles[..n].iter().filter(|&&x| x == a).count() as f64;
        p *= (m * theta + (1.0 - theta) * b[a]) / (1.0 + (n as f64 - 1.0) * theta);
    }
    p
}

/// Joint probability of two unrelated genotypes from one subpopulation when
/// the first genotype is taken at its Hardy-Weinberg probability and the
/// second is drawn from the urn after the first two alleles.
pub fn unrelated_joint(b: &[f64], theta: f64, g1: (usize, usize), g2: (usize, usize)) -> f64 {
    let mut first = 0.0;
    let mut both = 0.0;
    for (a1, a2) in orderings(g1) {
        first += urn(b, theta, &[a1, a2]);
        for (a3, a4) in orderings(g2) {
            both += urn(b, theta, &[a1, a2, a3, a4]);
        }
    }
    hwe(b, g1) * both / first
}

/// Numerator and denominator of the LR for "the source of `g1` stands in
/// relationship `rel` to the source of `g2`" against "unrelated members of
/// one subpopulation, conditioning on `g1`", by direct enumeration of
/// genotype pairs. GPM entries
/// become evidence likelihoods through `P(E | S = g) ∝ G_g / B_g`.
pub fn oracle_lr(g1: &Gpm, g2: &Gpm, b: &[f64], theta: f64, rel: Relationship) -> (f64, f64) {
    related_oracle(g1, g2, b, theta, |x, y| related_joint(b, ibd(rel), x, y))
}

/// As [`oracle_lr`] with an arbitrary joint genotype distribution under
/// the related hypothesis.
pub fn related_oracle(
    g1: &Gpm,
    g2: &Gpm,
    b: &[f64],
    theta: f64,
    joint: impl Fn((usize, usize), (usize, usize)) -> f64,
) -> (f64, f64) {
    let gs = genotypes(b.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for &x in &gs {
        let w1 = g1.genotype_prob_at(x.0, x.1);
        if w1 == 0.0 {
            continue;
        }
        let l1 = w1 / hwe(b, x);
        for &y in &gs {
            let w2 = g2.genotype_prob_at(y.0, y.1);
            if w2 == 0.0 {
                continue;
            }
            let l2 = w2 / hwe(b, y);
            num += l1 * l2 * joint(x, y);
            den += l1 * l2 * unrelated_joint(b, theta, x, y);
        }
    }
    (num, den)
}

/// Parent/child joint genotype distribution when the transmitted allele
/// passes through mutation matrix `m` (row-major, `m[i*k+j]` = P(j | i)).
/// `child` is the first genotype.
pub fn mutated_parent_child_joint(
    b: &[f64],
    m: &[f64],
    child: (usize, usize),
    parent: (usize, usize),
) -> f64 {
    let k = b.len();
    let mut p = 0.0;
    for (x, y) in orderings(parent) {
        let parent_prob = b[x] * b[y];
        // either parental allele is transmitted with probability 1/2
        for transmitted in [x, y] {
            for received in 0..k {
                for (other, &bo) in b.iter().enumerate() {
                    if unordered(received, other) == child {
                        p += parent_prob * 0.5 * m[transmitted * k + received] * bo;
                    }
                }
            }
        }
    }
    p
}

// ---------------------------------------------------------------------------
// Random inputs
// ---------------------------------------------------------------------------

/// Strictly positive frequencies.
pub fn random_b(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

/// Random GPM with roughly `density` of its upper cells nonzero (at least
/// one).
pub fn random_gpm(rng: &mut impl Rng, locus: &LocusRef, density: f64) -> Gpm {
    let k = locus.k();
    let mut upper = vec![0.0; k * k];
    let mut any = false;
    for i in 0..k {
        for j in i..k {
            if rng.gen_bool(density) {
                upper[i * k + j] = rng.gen_range(0.01..1.0);
                any = true;
            }
        }
    }
    if !any {
        let i = rng.gen_range(0..k);
        let j = rng.gen_range(i..k);
        upper[i * k + j] = 1.0;
    }
    // genotype weights -> cells: off-diagonal weight split over two cells
    let total: f64 = upper.iter().sum();
    let mut cells = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let w = upper[i * k + j] / total;
            if i == j {
                cells[i * k + i] = w;
            } else {
                cells[i * k + j] = w / 2.0;
                cells[j * k + i] = w / 2.0;
            }
        }
    }
    Gpm::from_cells_normalized(locus.clone(), cells).unwrap()
}

// ---------------------------------------------------------------------------
// Synthetic database
// ---------------------------------------------------------------------------

pub fn synthetic_freqs(rng: &mut impl Rng, loci: usize) -> FrequencySet {
    let vectors = (0..loci).map(|n| {
        let k = rng.gen_range(6..=14);
        let l = numbered_locus(&format!("L{:02}", n + 1), k);
        let b = random_b(rng, k);
        AlleleFreqVector::new(l, b).unwrap()
    });
    FrequencySet::from_vectors(vectors.collect::<Vec<_>>())
}

fn draw(rng: &mut impl Rng, b: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in b.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    b.len() - 1
}

/// Profile text for `n` profiles over the loci of `freqs`, mixing certain
/// genotypes, background alleles and weighted designations; about one locus
/// in twenty is left out.
pub fn synthetic_profiles(
    rng: &mut impl Rng,
    freqs: &FrequencySet,
    n: usize,
    prefix: &str,
) -> String {
    let mut out = String::new();
    for p in 0..n {
        out += &format!("PROFILE {prefix}{p:05}\n");
        for lf in freqs.iter() {
            if rng.gen_bool(0.05) {
                continue;
            }
            let l = lf.locus();
            let b = lf.freqs().probs();
            let a = l.allele(draw(rng, b)).to_string();
            let c = l.allele(draw(rng, b)).to_string();
            let d = l.allele(draw(rng, b));
            let (v1, v2) = match rng.gen_range(0..10) {
                0..=5 => (a, c),
                6 => (a, "F".to_string()),
                7 | 8 if c != d => (a, format!("{c}@0.7/{d}@0.3")),
                9 if a != c => (format!("{a}@0.5/{c}@0.5"), d.to_string()),
                _ => (a, c),
            };
            out += &format!("LOCUS {} VEC {v1} VEC {v2}\n", l.name());
        }
        out.push('\n');
    }
    out
}
