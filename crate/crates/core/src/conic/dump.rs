//! Plain-text dump of a [`ConicProblem`] for cross-checking with other solvers.
//!
//! ```text
//! # comments and blank lines are ignored
//! blocks 2
//! psd 3
//! nonneg 4
//! constraints 1
//! 1 >= 1
//! entries 3
//! 0 0 0 0 1 0
//! 1 0 0 1 0.5 -0.25
//! 1 1 2 2 3 0
//! ```
//!
//! `blocks` lists every block as `psd <dim>` or `nonneg <dim>`. Constraint
//! lines are `<row> <sense> <rhs>` with rows numbered from 1 and sense one of
//! `=`, `>=`, `<=`. Each entry line is `<row> <block> <i> <j> <re> <im>` where
//! row 0 is the objective. Entries are the upper triangle (`i <= j`) of the
//! Hermitian coefficient, the lower triangle being its conjugate; nonnegative
//! blocks use `i = j` and `im = 0`. Repeated entries add up.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::Complex;

use super::{Block, BlockKind, Coefficient, ConicProblem, Constraint, Sense, Term};
use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Largest block dimension accepted by [`parse`].
pub const MAX_DIM: usize = 4096;
/// Cap on the dense storage (in matrix entries) a parsed problem may need.
pub const MAX_DENSE_ENTRIES: usize = 1 << 24;

fn sense_token(s: Sense) -> &'static str {
    match s {
        Sense::Eq => "=",
        Sense::Ge => ">=",
        Sense::Le => "<=",
    }
}

fn write_terms(out: &mut String, row: usize, terms: &[Term], blocks: &[Block]) {
    // Merge terms on the same block first so each entry is written once.
    let mut merged: BTreeMap<usize, CMat> = BTreeMap::new();
    let mut nonneg: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for t in terms {
        let block = blocks[t.block];
        match (&t.coef, block.kind) {
            (Coefficient::Entries(e), _) => {
                for &(i, v) in e {
                    *nonneg.entry((t.block, i)).or_default() += v;
                }
            }
            (c, BlockKind::Psd) => {
                *merged.entry(t.block).or_insert_with(|| CMat::zeros(block.dim, block.dim)) += c.to_dense(block.dim);
            }
            _ => {}
        }
    }
    let mut lines: BTreeMap<(usize, usize, usize), String> = BTreeMap::new();
    for ((b, i), v) in nonneg {
        if v != 0.0 {
            lines.insert((b, i, i), format!("{row} {b} {i} {i} {v:e} 0"));
        }
    }
    for (b, m) in merged {
        for j in 0..m.ncols() {
            for i in 0..=j {
                let z = m[(i, j)];
                let im = if i == j { 0.0 } else { z.im };
                if z.re != 0.0 || im != 0.0 {
                    lines.insert((b, i, j), format!("{row} {b} {i} {j} {:e} {im:e}", z.re));
                }
            }
        }
    }
    for l in lines.into_values() {
        out.push_str(&l);
        out.push('\n');
    }
}

/// Serializes `problem`; all coefficients are written in expanded form.
pub fn write(problem: &ConicProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "blocks {}", problem.blocks.len());
    for b in &problem.blocks {
        let kind = match b.kind {
            BlockKind::Psd => "psd",
            BlockKind::NonNeg => "nonneg",
        };
        let _ = writeln!(out, "{kind} {}", b.dim);
    }
    let _ = writeln!(out, "constraints {}", problem.constraints.len());
    for (i, c) in problem.constraints.iter().enumerate() {
        let _ = writeln!(out, "{} {} {:e}", i + 1, sense_token(c.sense), c.rhs);
    }
    let mut entries = String::new();
    write_terms(&mut entries, 0, &problem.objective, &problem.blocks);
    for (i, c) in problem.constraints.iter().enumerate() {
        write_terms(&mut entries, i + 1, &c.terms, &problem.blocks);
    }
    let _ = writeln!(out, "entries {}", entries.lines().count());
    out.push_str(&entries);
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank, non-comment line with its 1-based number.
    fn next(&mut self) -> Result<(usize, Vec<&'a str>)> {
        for (n, line) in self.inner.by_ref() {
            let line = line.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                return Ok((n + 1, line.split_whitespace().collect()));
            }
        }
        Err(Error::Parse("unexpected end of input".into()))
    }
}

fn err<T>(line: usize, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Parse(format!("line {line}: {msg}")))
}

fn num<T: std::str::FromStr>(line: usize, tok: &str) -> Result<T> {
    tok.parse().or_else(|_| err(line, format!("cannot parse '{tok}'")))
}

fn finite(line: usize, tok: &str) -> Result<f64> {
    let v: f64 = num(line, tok)?;
    if v.is_finite() {
        Ok(v)
    } else {
        err(line, "non-finite value")
    }
}

fn header(lines: &mut Lines, key: &str) -> Result<usize> {
    let (n, toks) = lines.next()?;
    match toks.as_slice() {
        [k, count] if *k == key => num(n, count),
        _ => err(n, format!("expected '{key} <count>'")),
    }
}

enum Acc {
    NonNeg(BTreeMap<usize, f64>),
    Psd(BTreeMap<(usize, usize), Complex<f64>>),
}

fn into_coefficient(acc: Acc, dim: usize) -> Coefficient {
    match acc {
        Acc::NonNeg(e) => Coefficient::Entries(e.into_iter().collect()),
        Acc::Psd(e) if e.keys().all(|(i, j)| i == j) => Coefficient::Diagonal(e.into_iter().map(|((i, _), z)| (i, z.re)).collect()),
        Acc::Psd(e) => {
            let mut m = CMat::zeros(dim, dim);
            for ((i, j), z) in e {
                m[(i, j)] += z;
                if i != j {
                    m[(j, i)] += z.conj();
                }
            }
            Coefficient::Dense(m)
        }
    }
}

/// Parses the format produced by [`write`].
pub fn parse(text: &str) -> Result<ConicProblem> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let nblocks = header(&mut lines, "blocks")?;
    let mut problem = ConicProblem::new();
    for _ in 0..nblocks {
        let (n, toks) = lines.next()?;
        let [kind, dim] = toks.as_slice() else { return err(n, "expected '<psd|nonneg> <dim>'") };
        let dim: usize = num(n, dim)?;
        if dim == 0 || dim > MAX_DIM {
            return err(n, format!("block dimension must be in 1..={MAX_DIM}"));
        }
        match *kind {
            "psd" => problem.add_psd_block(dim),
            "nonneg" => problem.add_nonneg_block(dim),
            other => return err(n, format!("unknown block kind '{other}'")),
        };
    }
    let ncons = header(&mut lines, "constraints")?;
    let mut senses = Vec::new();
    for c in 0..ncons {
        let (n, toks) = lines.next()?;
        let [row, sense, rhs] = toks.as_slice() else { return err(n, "expected '<row> <sense> <rhs>'") };
        if num::<usize>(n, row)? != c + 1 {
            return err(n, format!("expected constraint row {}", c + 1));
        }
        let sense = match *sense {
            "=" => Sense::Eq,
            ">=" => Sense::Ge,
            "<=" => Sense::Le,
            other => return err(n, format!("unknown sense '{other}'")),
        };
        senses.push((sense, finite(n, rhs)?));
    }
    let nentries = header(&mut lines, "entries")?;
    let mut acc: BTreeMap<(usize, usize), Acc> = BTreeMap::new();
    let mut dense_budget = MAX_DENSE_ENTRIES;
    for _ in 0..nentries {
        let (n, toks) = lines.next()?;
        let [row, block, i, j, re, im] = toks.as_slice() else { return err(n, "expected '<row> <block> <i> <j> <re> <im>'") };
        let (row, b, i, j): (usize, usize, usize, usize) = (num(n, row)?, num(n, block)?, num(n, i)?, num(n, j)?);
        let (re, im) = (finite(n, re)?, finite(n, im)?);
        if row > ncons {
            return err(n, format!("row {row} does not exist"));
        }
        let Some(blk) = problem.blocks.get(b).copied() else { return err(n, format!("block {b} does not exist")) };
        if i > j || j >= blk.dim {
            return err(n, "entry must satisfy i <= j < dim");
        }
        let slot = match acc.entry((row, b)) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => {
                let fresh = match blk.kind {
                    BlockKind::NonNeg => Acc::NonNeg(BTreeMap::new()),
                    BlockKind::Psd => {
                        dense_budget = match dense_budget.checked_sub(blk.dim * blk.dim) {
                            Some(rest) => rest,
                            None => return err(n, "problem too large"),
                        };
                        Acc::Psd(BTreeMap::new())
                    }
                };
                e.insert(fresh)
            }
        };
        match slot {
            Acc::NonNeg(m) => {
                if i != j || im != 0.0 {
                    return err(n, "nonnegative block entries need i = j and im = 0");
                }
                *m.entry(i).or_default() += re;
            }
            Acc::Psd(m) => {
                let im = if i == j {
                    if im != 0.0 {
                        return err(n, "diagonal entries must be real");
                    }
                    0.0
                } else {
                    im
                };
                *m.entry((i, j)).or_default() += Complex::new(re, im);
            }
        }
    }
    if let Ok((n, _)) = lines.next() {
        return err(n, "trailing data after the last entry");
    }
    let mut rows: Vec<Vec<Term>> = vec![Vec::new(); ncons + 1];
    for ((row, b), a) in acc {
        rows[row].push(Term { block: b, coef: into_coefficient(a, problem.blocks[b].dim) });
    }
    let mut rows = rows.into_iter();
    problem.objective = rows.next().unwrap_or_default();
    problem.constraints = rows.zip(senses).map(|(terms, (sense, rhs))| Constraint { terms, sense, rhs }).collect();
    problem.validate()?;
    Ok(problem)
}
