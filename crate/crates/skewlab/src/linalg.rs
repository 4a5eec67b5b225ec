//! Thin helpers over nalgebra's SVD for kernels, ranks and spans.

use nalgebra::{ComplexField, DMatrix, DVector};

pub type C64 = nalgebra::Complex<f64>;

fn padded<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> DMatrix<T> {
    let (r, c) = m.shape();
    if r >= c {
        return m.clone();
    }
    let mut p = DMatrix::zeros(c, c);
    p.rows_mut(0, r).copy_from(m);
    p
}

/// Orthonormal basis of the kernel of `m`; singular values at or below
/// `rel_cut` times the largest one count as zero.
pub fn null_space<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, rel_cut: f64) -> Vec<DVector<T>> {
    let c = m.ncols();
    if c == 0 {
        return Vec::new();
    }
    let svd = padded(m).svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max();
    let cut = rel_cut * smax;
    (0..c)
        .filter(|&i| svd.singular_values[i] <= cut)
        .map(|i| vt.row(i).adjoint())
        .collect()
}

pub fn rank<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, rel_cut: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let s = m.clone().svd(false, false).singular_values;
    let smax = s.max();
    s.iter().filter(|&&x| x > rel_cut * smax && x > 0.0).count()
}

/// Columns as a matrix.
pub fn hstack<T: ComplexField<RealField = f64>>(cols: &[DVector<T>]) -> DMatrix<T> {
    if cols.is_empty() {
        return DMatrix::zeros(0, 0);
    }
    DMatrix::from_columns(cols)
}

/// Orthonormal basis of the span of `vectors`.
pub fn orth_span<T: ComplexField<RealField = f64>>(vectors: &[DVector<T>], rel_cut: f64) -> Vec<DVector<T>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = hstack(vectors);
    let svd = m.svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Vec::new();
    }
    (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rel_cut * smax)
        .map(|i| u.column(i).into_owned())
        .collect()
}

/// Largest component of `v - P v`, with `P` the orthogonal projector onto the
/// span of the orthonormal family `basis`.
pub fn projection_residual<T: ComplexField<RealField = f64>>(basis: &[DVector<T>], v: &DVector<T>) -> f64 {
    let mut r = v.clone();
    for b in basis {
        let c = b.dotc(v);
        r -= b * c;
    }
    r.camax()
}

/// Two-sided subspace comparison: every normalised vector of one family is
/// projected onto the span of the other. Returns the worst residual, or
/// infinity when the dimensions differ.
pub fn subspace_distance<T: ComplexField<RealField = f64>>(a: &[DVector<T>], b: &[DVector<T>], rel_cut: f64) -> f64 {
    let qa = orth_span(a, rel_cut);
    let qb = orth_span(b, rel_cut);
    if qa.len() != qb.len() {
        return f64::INFINITY;
    }
    let one_way = |q: &[DVector<T>], other: &[DVector<T>]| {
        q.iter().map(|v| projection_residual(other, v)).fold(0.0, f64::max)
    };
    one_way(&qa, &qb).max(one_way(&qb, &qa))
}

/// Least-squares solution and the max-abs residual of `a x - b`. Uses
/// Householder QR when `a` has full column rank, SVD otherwise.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let (r, c) = a.shape();
    if r >= c && c > 0 {
        let qr = a.clone().qr();
        let rr = qr.r();
        let dmax = rr.diagonal().amax();
        if rr.diagonal().iter().all(|x| x.abs() > 1e-10 * dmax) {
            let qtb = qr.q().transpose() * b;
            if let Some(x) = rr.solve_upper_triangular(&qtb) {
                let res = (a * &x - b).amax();
                return (x, res);
            }
        }
    }
    let svd = a.clone().svd(true, true);
    let x = svd.solve(b, 1e-13 * svd.singular_values.max()).expect("svd factors present");
    let res = (a * &x - b).amax();
    (x, res)
}

/// Flatten a matrix column-major into a vector.
pub fn vec_of<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> DVector<T> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvec<T: ComplexField<RealField = f64>>(v: &DVector<T>, rows: usize, cols: usize) -> DMatrix<T> {
    DMatrix::from_column_slice(rows, cols, v.as_slice())
}

pub fn commutator<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a * b - b * a
}

pub fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let k = null_space(&m, 1e-9);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!((&m * v).amax() < 1e-14);
        }
    }

    #[test]
    fn zero_matrix_kernel_is_everything() {
        let m = DMatrix::<f64>::zeros(4, 3);
        assert_eq!(null_space(&m, 1e-9).len(), 3);
        assert_eq!(rank(&m, 1e-9), 0);
    }

    #[test]
    fn subspace_distance_detects_mismatch() {
        let e = |i: usize| DVector::from_fn(3, |k, _| if k == i { 1.0 } else { 0.0 });
        let a = vec![e(0), e(1)];
        let b = vec![e(0) + e(1), e(0) - e(1)];
        assert!(subspace_distance(&a, &b, 1e-9) < 1e-14);
        assert!(subspace_distance(&a, &[e(0), e(2)], 1e-9) > 0.5);
    }
}
