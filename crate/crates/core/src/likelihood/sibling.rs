use crate::error::{Error, Result};
use crate::locus::AlleleFreqVector;

/// Full-sibling LR for two certain genotypes `p/q` and `r/s`:
///
/// `(1/8)·[(1 + δ_pr/b_p)(1 + δ_qs/b_q) + (1 + δ_qr/b_q)(1 + δ_ps/b_p)]`
pub fn sibling_lr_closed_form(
    first: (&str, &str),
    second: (&str, &str),
    b: &AlleleFreqVector,
) -> Result<f64> {
    let locus = b.locus();
    let [p, q, r, s] = [first.0, first.1, second.0, second.1].map(|a| locus.require_index(a));
    let (p, q, r, s) = (p?, q?, r?, s?);
    let probs = b.probs();
    for a in [p, q, r, s] {
        if probs[a] == 0.0 {
            return Err(Error::UndefinedLr {
                locus: locus.name().to_string(),
                allele_i: locus.allele(a).to_string(),
                allele_j: locus.allele(a).to_string(),
            });
        }
    }
    let share = |x: usize, y: usize| if x == y { 1.0 / probs[x] } else { 0.0 };
    Ok(
        ((1.0 + share(p, r)) * (1.0 + share(q, s)) + (1.0 + share(q, r)) * (1.0 + share(p, s)))
            / 8.0,
    )
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::locus::Locus;

    fn b() -> AlleleFreqVector {
        let l = Arc::new(
            Locus::new(
                "L",
                ["x", "y", "z", "w"].iter().map(|s| s.to_string()).collect(),
            )
            .unwrap(),
        );
        AlleleFreqVector::new(l, vec![0.1, 0.2, 0.3, 0.4]).unwrap()
    }

    #[test]
    fn table_rows() {
        let b = b();
        let lr = |a, c| sibling_lr_closed_form(a, c, &b).unwrap();
        assert!((lr(("x", "x"), ("x", "x")) - 1.1f64.powi(2) / (4.0 * 0.01)).abs() < 1e-12);
        assert!((lr(("x", "y"), ("z", "w")) - 0.25).abs() < 1e-15);
        assert!((lr(("x", "y"), ("x", "y")) - 8.375).abs() < 1e-12);
        // order of the alleles within a genotype does not matter
        assert!((lr(("y", "x"), ("x", "y")) - 8.375).abs() < 1e-12);
    }

    #[test]
    fn zero_frequency_rejected() {
        let l = Arc::new(Locus::new("L", vec!["x".into(), "y".into()]).unwrap());
        let b = AlleleFreqVector::new(l, vec![1.0, 0.0]).unwrap();
        assert!(sibling_lr_closed_form(("x", "y"), ("x", "x"), &b).is_err());
    }
}
