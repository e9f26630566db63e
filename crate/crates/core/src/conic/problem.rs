use nalgebra::DVector;

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_deviation, real, CMat, CVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// A vector of nonnegative reals.
    NonNeg,
    /// A complex Hermitian positive semidefinite matrix.
    Psd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    pub dim: usize,
}

/// Linear functional of one block.
///
/// `Entries` applies to nonnegative blocks; the other variants describe a
/// Hermitian matrix `C` acting on a PSD block through `Re tr(C X)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    /// Sparse `(index, value)` pairs of a nonnegative block.
    Entries(Vec<(usize, f64)>),
    /// Sparse diagonal `(index, value)` pairs of a Hermitian matrix.
    Diagonal(Vec<(usize, f64)>),
    /// `Σ wₜ vₜ vₜᴴ`.
    LowRank(Vec<(f64, CVec)>),
    /// Full Hermitian matrix.
    Dense(CMat),
}

impl Coefficient {
    pub fn outer(weight: f64, v: CVec) -> Self {
        Coefficient::LowRank(vec![(weight, v)])
    }

    pub fn scaled_identity(dim: usize, weight: f64) -> Self {
        Coefficient::Diagonal((0..dim).map(|i| (i, weight)).collect())
    }

    pub fn scalar(index: usize, value: f64) -> Self {
        Coefficient::Entries(vec![(index, value)])
    }

    /// Dense Hermitian matrix of a PSD-block coefficient.
    pub fn to_dense(&self, dim: usize) -> CMat {
        let mut out = CMat::zeros(dim, dim);
        match self {
            Coefficient::Entries(_) => {}
            Coefficient::Diagonal(entries) => {
                for &(i, v) in entries {
                    out[(i, i)] += real(v);
                }
            }
            Coefficient::LowRank(terms) => {
                for (w, v) in terms {
                    out.ger(real(*w), v, &v.conjugate(), real(1.0));
                }
            }
            Coefficient::Dense(m) => out += m,
        }
        out
    }

    /// Value of the functional at a nonnegative block value.
    pub fn eval_nonneg(&self, x: &DVector<f64>) -> f64 {
        match self {
            Coefficient::Entries(entries) => entries.iter().map(|&(i, v)| v * x[i]).sum(),
            _ => 0.0,
        }
    }

    /// `Re tr(C X)` for a PSD block value.
    pub fn eval_psd(&self, x: &CMat) -> f64 {
        match self {
            Coefficient::Entries(_) => 0.0,
            Coefficient::Diagonal(entries) => entries.iter().map(|&(i, v)| v * x[(i, i)].re).sum(),
            Coefficient::LowRank(terms) => terms.iter().map(|(w, v)| w * v.dotc(&(x * v)).re).sum(),
            Coefficient::Dense(m) => crate::linalg::re_inner(m, x),
        }
    }

    fn check(&self, block: &Block) -> Result<()> {
        let in_range = |i: usize| i < block.dim;
        match (self, block.kind) {
            (Coefficient::Entries(e), BlockKind::NonNeg) => {
                if e.iter().any(|&(i, v)| !in_range(i) || !v.is_finite()) {
                    return invalid("entry index out of range or non-finite value");
                }
            }
            (Coefficient::Diagonal(e), BlockKind::Psd) => {
                if e.iter().any(|&(i, v)| !in_range(i) || !v.is_finite()) {
                    return invalid("diagonal index out of range or non-finite value");
                }
            }
            (Coefficient::LowRank(terms), BlockKind::Psd) => {
                for (w, v) in terms {
                    if v.len() != block.dim || !w.is_finite() || v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                        return invalid("low-rank factor has wrong length or non-finite data");
                    }
                }
            }
            (Coefficient::Dense(m), BlockKind::Psd) => {
                if m.nrows() != block.dim || m.ncols() != block.dim {
                    return invalid("dense coefficient has wrong shape");
                }
                if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return invalid("dense coefficient has non-finite entries");
                }
                if hermitian_deviation(m) > 1e-12 * m.norm().max(1.0) {
                    return invalid("dense coefficient is not Hermitian");
                }
            }
            _ => return invalid("coefficient kind does not match block kind"),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    /// `lhs ≥ rhs`
    Ge,
    /// `lhs ≤ rhs`
    Le,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub block: usize,
    pub coef: Coefficient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<Term>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Value of one block of a primal or dual conic variable.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockValue {
    NonNeg(DVector<f64>),
    Psd(CMat),
}

impl BlockValue {
    pub fn as_psd(&self) -> Option<&CMat> {
        match self {
            BlockValue::Psd(m) => Some(m),
            BlockValue::NonNeg(_) => None,
        }
    }

    pub fn as_nonneg(&self) -> Option<&DVector<f64>> {
        match self {
            BlockValue::NonNeg(v) => Some(v),
            BlockValue::Psd(_) => None,
        }
    }
}

/// Block-diagonal conic program
///
/// ```text
/// minimize   Σ_b ⟨C_b, X_b⟩
/// subject to Σ_b ⟨A_ib, X_b⟩ (=, ≥, ≤) r_i
///            X_b ≥ 0 (nonnegative blocks) or X_b ⪰ 0 (Hermitian PSD blocks)
/// ```
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConicProblem {
    pub blocks: Vec<Block>,
    pub objective: Vec<Term>,
    pub constraints: Vec<Constraint>,
}

impl ConicProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_nonneg_block(&mut self, dim: usize) -> usize {
        self.blocks.push(Block { kind: BlockKind::NonNeg, dim });
        self.blocks.len() - 1
    }

    pub fn add_psd_block(&mut self, dim: usize) -> usize {
        self.blocks.push(Block { kind: BlockKind::Psd, dim });
        self.blocks.len() - 1
    }

    pub fn add_objective(&mut self, block: usize, coef: Coefficient) {
        self.objective.push(Term { block, coef });
    }

    pub fn add_constraint(&mut self, terms: Vec<Term>, sense: Sense, rhs: f64) -> usize {
        self.constraints.push(Constraint { terms, sense, rhs });
        self.constraints.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        let check_terms = |terms: &[Term]| -> Result<()> {
            for t in terms {
                let block = self.blocks.get(t.block).ok_or_else(|| Error::InvalidInput(format!("block {} does not exist", t.block)))?;
                t.coef.check(block)?;
            }
            Ok(())
        };
        check_terms(&self.objective)?;
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return invalid(format!("constraint {i} has a non-finite right-hand side"));
            }
            check_terms(&c.terms).map_err(|e| Error::InvalidInput(format!("constraint {i}: {e}")))?;
        }
        Ok(())
    }

    /// Evaluates a list of terms at a point.
    pub fn eval_terms(terms: &[Term], point: &[BlockValue]) -> f64 {
        terms
            .iter()
            .map(|t| match &point[t.block] {
                BlockValue::NonNeg(v) => t.coef.eval_nonneg(v),
                BlockValue::Psd(m) => t.coef.eval_psd(m),
            })
            .sum()
    }

    pub fn objective_value(&self, point: &[BlockValue]) -> f64 {
        Self::eval_terms(&self.objective, point)
    }

    /// Signed slack of every constraint: `lhs − rhs` for `≥`, `rhs − lhs` for
    /// `≤`, and `−|lhs − rhs|` for equalities.
    pub fn slacks(&self, point: &[BlockValue]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| {
                let lhs = Self::eval_terms(&c.terms, point);
                match c.sense {
                    Sense::Ge => lhs - c.rhs,
                    Sense::Le => c.rhs - lhs,
                    Sense::Eq => -(lhs - c.rhs).abs(),
                }
            })
            .collect()
    }
}
