//! GPMs of relatives.
//!
//! Given the GPM `G` of a profiled individual with allele marginal `x` and
//! background frequencies `b`, the GPM of a relative under Hardy-Weinberg
//! equilibrium is
//!
//! | relationship | GPM of relative                                   |
//! |--------------|---------------------------------------------------|
//! | degree 1     | `(xᵀb + bᵀx)/2`                                   |
//! | degree n     | `(xᵀb + bᵀx + (2ⁿ − 2)·bᵀb)/2ⁿ`                   |
//! | full sibling | `(G + xᵀb + bᵀx + bᵀb)/4`                         |
//!
//! Along a unilineal line of descent each parent-child link can pass the
//! transmitted allele through a stepwise mutation matrix, replacing `x` by
//! `x·Mⁿ`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gpm::Gpm;
use crate::locus::{ensure_same_locus, AlleleFreqVector, LocusRef};

/// Row sums of a mutation matrix must be one within this tolerance.
pub const MUTATION_ROW_TOLERANCE: f64 = 1e-12;

/// Repeat counts closer than this are treated as equal when finding
/// one-step neighbours.
const REPEAT_EPSILON: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relationship {
    Same,
    /// Unilineal relative `n ≥ 1` meioses away (parent/child = 1).
    Degree(u32),
    FullSibling,
}

impl Relationship {
    pub fn degree(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange {
                name: "degree",
                value: 0.0,
                expected: "n >= 1",
            });
        }
        Ok(Self::Degree(n))
    }

    /// Short canonical name, e.g. `same`, `d2`, `sibling`.
    pub fn name(&self) -> String {
        match self {
            Self::Same => "same".into(),
            Self::Degree(n) => format!("d{n}"),
            Self::FullSibling => "sibling".into(),
        }
    }
}

impl fmt::Display for Relationship {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Relationship {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .map(|c| if c == '_' || c == ' ' { '-' } else { c })
            .collect();
        let unknown = || Error::UnknownRelationship(s.to_string());
        let rel = match key.as_str() {
            "same" | "identical" | "direct" => Self::Same,
            "sibling" | "sib" | "full-sibling" | "full-sib" => Self::FullSibling,
            "d1" | "parent" | "child" => Self::Degree(1),
            "d2" | "grandparent" | "grandchild" | "uncle" | "aunt" | "nephew" | "niece"
            | "half-sibling" | "half-sib" => Self::Degree(2),
            "d3" | "great-grandparent" | "great-grandchild" | "great-aunt" | "great-uncle"
            | "great-niece" | "great-nephew" | "first-cousin" | "cousin" => Self::Degree(3),
            other => {
                let digits = other
                    .strip_prefix("dn:")
                    .or_else(|| other.strip_prefix('d'))
                    .ok_or_else(unknown)?;
                let n: u32 = digits.parse().map_err(|_| unknown())?;
                Self::degree(n)?
            }
        };
        Ok(rel)
    }
}

/// `M[i][j]`: probability that a child receives allele `j` from a parent
/// transmitting allele `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MutationMatrix {
    locus: LocusRef,
    cells: Vec<f64>,
}

impl MutationMatrix {
    /// Checks shape, non-negativity and unit row sums.
    pub fn from_cells(locus: LocusRef, cells: Vec<f64>) -> Result<Self> {
        let k = locus.k();
        let invalid = |message: String| Error::InvalidMutationMatrix {
            locus: locus.name().to_string(),
            message,
        };
        if cells.len() != k * k {
            return Err(invalid(format!(
                "expected {} cells, got {}",
                k * k,
                cells.len()
            )));
        }
        for (i, row) in cells.chunks_exact(k).enumerate() {
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(invalid(format!(
                    "row {i} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > MUTATION_ROW_TOLERANCE {
                return Err(invalid(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { locus, cells })
    }

    pub fn identity(locus: LocusRef) -> Self {
        let k = locus.k();
        let mut cells = vec![0.0; k * k];
        for i in 0..k {
            cells[i * k + i] = 1.0;
        }
        Self { locus, cells }
    }

    pub fn locus(&self) -> &LocusRef {
        &self.locus
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.locus.k() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.locus.k();
        &self.cells[i * k..(i + 1) * k]
    }
}

/// Stepwise mutation model: an allele mutates with probability `rate`, one
/// repeat up with probability `rate·up_fraction` and one repeat down with
/// `rate·(1 − up_fraction)`. A step onto a repeat count absent from the
/// alphabet stays on the diagonal.
pub fn build_mutation_matrix(
    locus: &LocusRef,
    rate: f64,
    up_fraction: f64,
) -> Result<MutationMatrix> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::OutOfRange {
            name: "mutation rate",
            value: rate,
            expected: "0 <= rate < 1",
        });
    }
    if !(0.0..=1.0).contains(&up_fraction) {
        return Err(Error::OutOfRange {
            name: "mutation up fraction",
            value: up_fraction,
            expected: "[0, 1]",
        });
    }
    let repeats = locus
        .alleles()
        .iter()
        .map(|label| match label.trim().parse::<f64>() {
            Ok(r) if r.is_finite() => Ok(r),
            _ => Err(Error::RepeatLabel {
                locus: locus.name().to_string(),
                label: label.clone(),
            }),
        })
        .collect::<Result<Vec<f64>>>()?;

    let k = locus.k();
    let neighbour = |i: usize, step: f64| {
        let target = repeats[i] + step;
        (0..k).find(|&j| j != i && (repeats[j] - target).abs() < REPEAT_EPSILON)
    };
    let mut cells = vec![0.0; k * k];
    for i in 0..k {
        let row = &mut cells[i * k..(i + 1) * k];
        row[i] = 1.0 - rate;
        for (step, mass) in [
            (1.0, rate * up_fraction),
            (-1.0, rate * (1.0 - up_fraction)),
        ] {
            match neighbour(i, step) {
                Some(j) => row[j] += mass,
                None => row[i] += mass,
            }
        }
    }
    MutationMatrix::from_cells(locus.clone(), cells)
}

/// A relationship hypothesis, optionally with a mutation matrix applied on
/// each parent-child link of a unilineal relationship.
#[derive(Clone, Copy, Debug)]
pub struct RelationshipSpec<'m> {
    pub kind: Relationship,
    pub mutation: Option<&'m MutationMatrix>,
}

impl<'m> RelationshipSpec<'m> {
    pub fn new(kind: Relationship) -> Self {
        Self {
            kind,
            mutation: None,
        }
    }

    pub fn with_mutation(kind: Relationship, mutation: &'m MutationMatrix) -> Result<Self> {
        let spec = Self {
            kind,
            mutation: Some(mutation),
        };
        spec.check()?;
        Ok(spec)
    }

    /// Sibling GPMs have no mutated form; asking for one is an error.
    pub fn check(&self) -> Result<()> {
        match (self.kind, self.mutation) {
            (Relationship::FullSibling, Some(_)) => Err(Error::SiblingMutation),
            (Relationship::Degree(0), _) => Err(Error::OutOfRange {
                name: "degree",
                value: 0.0,
                expected: "n >= 1",
            }),
            _ => Ok(()),
        }
    }
}

impl From<Relationship> for RelationshipSpec<'_> {
    fn from(kind: Relationship) -> Self {
        Self::new(kind)
    }
}

/// Cell-level view of `R(G)` without materializing it. Entries for `i ≤ j`
/// are what [`rel_transform`] stores in both `(i, j)` and `(j, i)`.
pub(crate) enum RelativeView<'a> {
    Same(&'a Gpm),
    Lineage {
        x: Vec<f64>,
        b: &'a [f64],
        scale: f64,
    },
    Sibling {
        g: &'a Gpm,
        x: Vec<f64>,
        b: &'a [f64],
    },
}

impl<'a> RelativeView<'a> {
    pub(crate) fn new(
        g: &'a Gpm,
        spec: &RelationshipSpec<'_>,
        b: &'a AlleleFreqVector,
    ) -> Result<Self> {
        spec.check()?;
        if spec.kind == Relationship::Same {
            return Ok(Self::Same(g));
        }
        ensure_same_locus(g.locus(), b.locus())?;
        let marginal = g.marginal();
        match spec.kind {
            Relationship::Same => unreachable!(),
            Relationship::Degree(n) => {
                let mut x = marginal.probs().to_vec();
                if let Some(m) = spec.mutation {
                    ensure_same_locus(g.locus(), m.locus())?;
                    for _ in 0..n {
                        x = mutate(&x, m);
                    }
                }
                Ok(Self::Lineage {
                    x,
                    b: b.probs(),
                    scale: 0.5f64.powi(n.min(i32::MAX as u32) as i32),
                })
            }
            Relationship::FullSibling => Ok(Self::Sibling {
                g,
                x: marginal.probs().to_vec(),
                b: b.probs(),
            }),
        }
    }

    #[inline]
    pub(crate) fn entry(&self, i: usize, j: usize) -> f64 {
        match self {
            Self::Same(g) => g.cell(i, j),
            Self::Lineage { x, b, scale } => {
                (x[i] * b[j] + b[i] * x[j]) * scale + (1.0 - 2.0 * scale) * (b[i] * b[j])
            }
            Self::Sibling { g, x, b } => {
                (g.cell(i, j) + (x[i] * b[j] + b[i] * x[j]) + b[i] * b[j]) / 4.0
            }
        }
    }

    fn materialize(&self, locus: &LocusRef) -> Gpm {
        match self {
            Self::Same(g) => (*g).clone(),
            _ => Gpm::from_upper_fn(locus.clone(), |i, j| self.entry(i, j)),
        }
    }
}

fn mutate(x: &[f64], m: &MutationMatrix) -> Vec<f64> {
    let k = x.len();
    let mut out = vec![0.0; k];
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        for (o, &mij) in out.iter_mut().zip(m.row(i)) {
            *o += xi * mij;
        }
    }
    out
}

/// `R(G)` for any supported relationship.
pub fn rel_transform(g: &Gpm, spec: &RelationshipSpec<'_>, b: &AlleleFreqVector) -> Result<Gpm> {
    Ok(RelativeView::new(g, spec, b)?.materialize(g.locus()))
}

/// Parent or child: `(x'ᵀb + bᵀx')/2` with `x' = x·M` when `M` is given.
pub fn rel_d1(g: &Gpm, b: &AlleleFreqVector, mutation: Option<&MutationMatrix>) -> Result<Gpm> {
    rel_dn(g, b, 1, mutation)
}

/// Degree-`n` unilineal relative.
pub fn rel_dn(
    g: &Gpm,
    b: &AlleleFreqVector,
    n: u32,
    mutation: Option<&MutationMatrix>,
) -> Result<Gpm> {
    let spec = RelationshipSpec {
        kind: Relationship::degree(n)?,
        mutation,
    };
    rel_transform(g, &spec, b)
}

/// Full sibling: `(G + xᵀb + bᵀx + B)/4`.
pub fn rel_sibling(g: &Gpm, b: &AlleleFreqVector) -> Result<Gpm> {
    rel_transform(g, &RelationshipSpec::new(Relationship::FullSibling), b)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::gpm::{background_gpm, gpm_from_genotype, validate};
    use crate::locus::Locus;

    fn locus(labels: &[&str]) -> LocusRef {
        Arc::new(Locus::new("L", labels.iter().map(|s| s.to_string()).collect()).unwrap())
    }

    fn abcd() -> (LocusRef, AlleleFreqVector) {
        let l = locus(&["8", "9", "10", "11"]);
        let b = AlleleFreqVector::new(l.clone(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        (l, b)
    }

    fn assert_gpm_close(a: &Gpm, b: &Gpm, tol: f64) {
        for (x, y) in a.cells().iter().zip(b.cells()) {
            assert!((x - y).abs() <= tol, "{:?}\n{:?}", a.cells(), b.cells());
        }
    }

    #[test]
    fn relationship_names() {
        let cases = [
            ("same", Relationship::Same),
            ("parent", Relationship::Degree(1)),
            ("Child", Relationship::Degree(1)),
            ("d1", Relationship::Degree(1)),
            ("half-sibling", Relationship::Degree(2)),
            ("uncle", Relationship::Degree(2)),
            ("grandchild", Relationship::Degree(2)),
            ("first cousin", Relationship::Degree(3)),
            ("great_niece", Relationship::Degree(3)),
            ("d3", Relationship::Degree(3)),
            ("dN:5", Relationship::Degree(5)),
            ("d7", Relationship::Degree(7)),
            ("sibling", Relationship::FullSibling),
        ];
        for (name, rel) in cases {
            assert_eq!(name.parse::<Relationship>().unwrap(), rel, "{name}");
        }
        for bad in ["dn:0", "d0", "cousin-ish", "dn:x", ""] {
            assert!(bad.parse::<Relationship>().is_err(), "{bad}");
        }
        assert_eq!(Relationship::Degree(4).to_string(), "d4");
    }

    #[test]
    fn mutation_matrix_rate_zero_is_identity() {
        let (l, _) = abcd();
        let m = build_mutation_matrix(&l, 0.0, 0.5).unwrap();
        assert_eq!(m, MutationMatrix::identity(l));
    }

    #[test]
    fn mutation_matrix_interior_and_boundary_rows() {
        let (l, _) = abcd();
        let m = build_mutation_matrix(&l, 0.002, 0.5).unwrap();
        let expect_row = |i: usize, row: [f64; 4]| {
            for (a, e) in m.row(i).iter().zip(row) {
                assert!((a - e).abs() < 1e-15, "row {i}: {:?}", m.row(i));
            }
        };
        expect_row(0, [0.999, 0.001, 0.0, 0.0]);
        expect_row(1, [0.001, 0.998, 0.001, 0.0]);
        expect_row(3, [0.0, 0.0, 0.001, 0.999]);
    }

    #[test]
    fn mutation_matrix_asymmetric_and_microvariant_gap() {
        let l = locus(&["9", "9.3", "10", "12"]);
        let m = build_mutation_matrix(&l, 0.01, 0.7).unwrap();
        // 9 -> 10 up, nothing down
        assert!((m.get(0, 2) - 0.007).abs() < 1e-15);
        assert!((m.get(0, 0) - 0.993).abs() < 1e-15);
        // 9.3 has no neighbours at all
        assert!((m.get(1, 1) - 1.0).abs() < 1e-15);
        // 12 has no neighbours (11 and 13 absent)
        assert!((m.get(3, 3) - 1.0).abs() < 1e-15);
        // 10 -> 9 down only
        assert!((m.get(2, 0) - 0.003).abs() < 1e-15);
    }

    #[test]
    fn mutation_matrix_errors() {
        let (l, _) = abcd();
        assert!(build_mutation_matrix(&l, 1.0, 0.5).is_err());
        assert!(build_mutation_matrix(&l, -0.1, 0.5).is_err());
        assert!(build_mutation_matrix(&l, 0.1, 1.5).is_err());
        let bad = locus(&["8", "X"]);
        assert!(matches!(
            build_mutation_matrix(&bad, 0.1, 0.5),
            Err(Error::RepeatLabel { .. })
        ));
        assert!(MutationMatrix::from_cells(l.clone(), vec![0.5; 16]).is_err());
    }

    #[test]
    fn d1_of_certain_heterozygote() {
        let l = locus(&["A", "B", "C", "D"]);
        let b = AlleleFreqVector::new(l.clone(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let ac = gpm_from_genotype(&l, "A", "C").unwrap();
        let child = rel_d1(&ac, &b, None).unwrap();
        // one allele is A or C with probability 1/2, the other a background draw
        for i in 0..4 {
            for j in 0..4 {
                let x = [0.5, 0.0, 0.5, 0.0];
                let expected = (x[i] * b.probs()[j] + b.probs()[i] * x[j]) / 2.0;
                assert!((child.cell(i, j) - expected).abs() < 1e-15);
            }
        }
        assert!(
            (child.genotype_probability("A", "C").unwrap() - (0.5 * 0.3 + 0.5 * 0.1)).abs() < 1e-15
        );
        assert!(validate(&child).is_empty());
    }

    #[test]
    fn identity_mutation_changes_nothing() {
        let (l, b) = abcd();
        let bob = gpm_from_genotype(&l, "8", "9").unwrap();
        let id = MutationMatrix::identity(l);
        assert_eq!(
            rel_d1(&bob, &b, Some(&id)).unwrap(),
            rel_d1(&bob, &b, None).unwrap()
        );
        assert_eq!(
            rel_dn(&bob, &b, 3, Some(&id)).unwrap(),
            rel_dn(&bob, &b, 3, None).unwrap()
        );
    }

    #[test]
    fn d2_hand_value() {
        let (l, b) = abcd();
        let ab = gpm_from_genotype(&l, "8", "9").unwrap();
        let d2 = rel_dn(&ab, &b, 2, None).unwrap();
        // (1 + 0 + 2·0.1)·0.1/4
        assert!((d2.cell(0, 0) - 0.03).abs() < 1e-15);
    }

    #[test]
    fn dn_converges_to_background() {
        let (l, b) = abcd();
        let bg = background_gpm(&b);
        let g = gpm_from_genotype(&l, "8", "11").unwrap();
        let far = rel_dn(&g, &b, 20, None).unwrap();
        assert_gpm_close(&far, &bg, 1e-5);
        let very_far = rel_dn(&g, &b, 5000, None).unwrap();
        assert_gpm_close(&very_far, &bg, 1e-15);
        assert!(validate(&very_far).is_empty());
    }

    #[test]
    fn mutation_shifts_lineage_mass() {
        let (l, b) = abcd();
        let m = build_mutation_matrix(&l, 0.1, 0.5).unwrap();
        let g = gpm_from_genotype(&l, "9", "9").unwrap();
        let plain = rel_d1(&g, &b, None).unwrap();
        let mutated = rel_d1(&g, &b, Some(&m)).unwrap();
        // x·M = (0.05, 0.9, 0.05, 0)
        let expected_8_8 = 0.05 * 0.1;
        assert!((mutated.cell(0, 0) - expected_8_8).abs() < 1e-15);
        assert_eq!(plain.cell(0, 0), 0.0);
        assert!(validate(&mutated).is_empty());
    }

    #[test]
    fn sibling_rejects_mutation() {
        let (l, b) = abcd();
        let m = MutationMatrix::identity(l.clone());
        let g = gpm_from_genotype(&l, "8", "9").unwrap();
        assert!(matches!(
            RelationshipSpec::with_mutation(Relationship::FullSibling, &m),
            Err(Error::SiblingMutation)
        ));
        let spec = RelationshipSpec {
            kind: Relationship::FullSibling,
            mutation: Some(&m),
        };
        assert!(matches!(
            rel_transform(&g, &spec, &b),
            Err(Error::SiblingMutation)
        ));
    }

    #[test]
    fn sibling_of_bob() {
        let (l, b) = abcd();
        let bob = gpm_from_genotype(&l, "8", "9").unwrap();
        let sib = rel_sibling(&bob, &b).unwrap();
        assert!((sib.cell(0, 0) - 0.0275).abs() < 1e-15);
        assert!((sib.genotype_prob_at(0, 1) - 0.335).abs() < 1e-15);
        assert!(validate(&sib).is_empty());
    }

    #[test]
    fn same_is_identity() {
        let (l, b) = abcd();
        let g = gpm_from_genotype(&l, "8", "10").unwrap();
        assert_eq!(
            rel_transform(&g, &Relationship::Same.into(), &b).unwrap(),
            g
        );
    }

    #[test]
    fn locus_mismatch_detected() {
        let (l, b) = abcd();
        let other = locus(&["8", "9", "10", "12"]);
        let g = gpm_from_genotype(&other, "8", "9").unwrap();
        assert!(rel_sibling(&g, &b).is_err());
        let m = MutationMatrix::identity(other);
        let g = gpm_from_genotype(&l, "8", "9").unwrap();
        assert!(rel_d1(&g, &b, Some(&m)).is_err());
    }
}
