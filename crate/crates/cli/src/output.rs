//! Plain-text tables and CSV for command output.

use std::io::{self, Write};

use gpm_core::{AlleleVector, Gpm};

/// `x` to six significant digits in the style of C's `%g`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Columns padded to their widest cell; numbers are right-aligned and
/// text left-aligned.
pub struct Table {
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self { rows: vec![header] }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, out: &mut impl Write) -> io::Result<()> {
        let cols = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..cols)
            .map(|c| {
                self.rows
                    .iter()
                    .filter_map(|r| r.get(c))
                    .map(|s| s.chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        for row in &self.rows {
            let mut line = String::new();
            for (c, cell) in row.iter().enumerate() {
                if c > 0 {
                    line += "  ";
                }
                if cell.parse::<f64>().is_ok() {
                    line += &format!("{cell:>w$}", w = widths[c]);
                } else {
                    line += &format!("{cell:<w$}", w = widths[c]);
                }
            }
            writeln!(out, "{}", line.trim_end())?;
        }
        Ok(())
    }
}

pub fn strings<const N: usize>(cols: [&str; N]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

/// Full symmetric matrix with allele labels on both axes.
pub fn gpm_table(g: &Gpm) -> Table {
    let alleles = g.locus().alleles();
    let mut header = vec![String::new()];
    header.extend(alleles.iter().cloned());
    let mut t = Table::new(header);
    for (i, a) in alleles.iter().enumerate() {
        let mut row = vec![a.clone()];
        row.extend((0..g.k()).map(|j| sig6(g.cell(i, j))));
        t.push(row);
    }
    t
}

pub fn vector_row(name: &str, designation: &str, v: &AlleleVector) -> Vec<String> {
    let mut row = vec![name.to_string(), designation.to_string()];
    row.extend(v.probs().iter().map(|p| sig6(*p)));
    row
}

/// Upper-triangle cells of a GPM: `(allele_i, allele_j, cell, genotype
/// probability)`.
pub fn upper_cells(g: &Gpm) -> impl Iterator<Item = (String, String, f64, f64)> + '_ {
    let locus = g.locus();
    (0..g.k()).flat_map(move |i| {
        (i..g.k()).map(move |j| {
            (
                locus.allele(i).to_string(),
                locus.allele(j).to_string(),
                g.cell(i, j),
                g.genotype_prob_at(i, j),
            )
        })
    })
}
