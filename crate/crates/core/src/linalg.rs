//! Small dense complex linear-algebra helpers shared by the solver and the
//! signal-model code.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

#[inline]
pub fn real(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

/// `v vᴴ`.
pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// `Re(vᴴ M v)`.
pub fn quad_form(v: &CVec, m: &CMat) -> f64 {
    v.dotc(&(m * v)).re
}

/// `|aᴴ b|²`.
#[inline]
pub fn abs2_dot(a: &CVec, b: &CVec) -> f64 {
    a.dotc(b).norm_sqr()
}

/// Real inner product `Re tr(Aᴴ B)` of two complex matrices.
pub fn re_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * real(0.5)
}

pub fn trace_re(m: &CMat) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// Largest elementwise deviation from Hermitian symmetry.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = nalgebra::SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Dominant eigenpair `(λ₁, v₁)` with `‖v₁‖ = 1`.
pub fn dominant_eigenpair(m: &CMat) -> (f64, CVec) {
    let (values, vectors) = hermitian_eigen(m);
    (values[0], vectors.column(0).into_owned())
}

/// Principal square root of a Hermitian PSD matrix; negative eigenvalues are
/// clamped to zero.
pub fn psd_sqrt(m: &CMat) -> CMat {
    let n = m.nrows();
    let (values, vectors) = hermitian_eigen(m);
    let mut scaled = vectors.clone();
    for (c, &lam) in values.iter().enumerate() {
        let s = real(lam.max(0.0).sqrt());
        for r in 0..n {
            scaled[(r, c)] *= s;
        }
    }
    &scaled * vectors.adjoint()
}

/// Solves `M x = b` for Hermitian positive definite `M`.
pub fn hpd_solve(m: &CMat, b: &CVec) -> Option<CVec> {
    m.clone().cholesky().map(|ch| ch.solve(b))
}
