//! Small dense symmetric-matrix helpers shared by the solver, certificates and sampler.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    sym_eigen(m).0.iter().copied().collect()
}

pub fn min_eig(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    sym_eigen(m).0[0]
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Largest absolute asymmetry `max |m_ij - m_ji|`.
pub fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Euclidean projection onto the PSD cone: clip negative eigenvalues.
pub fn project_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (values, vectors) = sym_eigen(m);
    let clipped = values.map(|v| v.max(0.0));
    reconstruct(&vectors, &clipped)
}

fn reconstruct(vectors: &DMatrix<f64>, values: &DVector<f64>) -> DMatrix<f64> {
    let mut scaled = vectors.clone();
    for (j, v) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*v);
    }
    symmetrize(&(scaled * vectors.transpose()))
}

/// Pseudo-inverse of a symmetric PSD matrix; eigenvalues at or below
/// `rel * max|eigenvalue|` are treated as zero.
pub fn pinv_sym(m: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let (values, vectors) = sym_eigen(m);
    let top = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cut = rel * top;
    let inv = values.map(|v| if v.abs() > cut && v.abs() > 0.0 { 1.0 / v } else { 0.0 });
    reconstruct(&vectors, &inv)
}

/// Factor `m = D D^T` with `D` of full column rank `k`, dropping eigenvalues
/// at or below `rel * max eigenvalue`.
pub fn low_rank_factor(m: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let (values, vectors) = sym_eigen(m);
    let top = values.iter().fold(0.0f64, |a, v| a.max(*v));
    let cut = rel * top;
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > cut && values[i] > 0.0).collect();
    let mut d = DMatrix::zeros(m.nrows(), keep.len());
    for (col, &i) in keep.iter().enumerate() {
        d.set_column(col, &(vectors.column(i) * values[i].sqrt()));
    }
    d
}

/// Square-root factor `L` with `L L^T = m`, negative eigenvalues clipped.
/// Works for rank-deficient covariances.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (values, vectors) = sym_eigen(m);
    let mut l = vectors;
    for (j, v) in values.iter().enumerate() {
        l.column_mut(j).scale_mut(v.max(0.0).sqrt());
    }
    l
}

/// True when the smallest eigenvalue is at least `-rel * max|eigenvalue|`.
pub fn is_psd(m: &DMatrix<f64>, rel: f64) -> bool {
    let values = sym_eigenvalues(m);
    let top = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    values.first().is_none_or(|&lo| lo >= -rel * top)
}

pub fn spectral_norm_sym(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m).iter().fold(0.0f64, |a, v| a.max(v.abs()))
}
