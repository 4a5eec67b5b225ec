//! Dense multilinear algebra on the model space.
//!
//! Norms are tensorial: the sum of squared moduli of all components after
//! raising every index, so a k-form has k! times its "geometer's" norm
//! (|e1 ∧ e2|² = 2). Wedge products use the determinant convention
//! a ∧ b = Σ_σ sgn(σ) (a ⊗ b)∘σ / (p! q!).

use itertools::Itertools;
use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Scalar field of a tensor: `f64` or `Complex<f64>`.
pub trait Field: ComplexField<RealField = f64> + Copy {
    const COMPLEX: bool;
}

impl Field for f64 {
    const COMPLEX: bool = false;
}

impl Field for C64 {
    const COMPLEX: bool = true;
}

/// Valence-(r,s) array; the r contravariant slots come first.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor<S> {
    dim: usize,
    valence: (usize, usize),
    data: Vec<S>,
}

pub type RTensor = DenseTensor<f64>;
pub type CTensor = DenseTensor<C64>;

/// Calls `f` on every multi-index of the given rank, last index fastest.
pub fn for_each_index(dim: usize, rank: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; rank];
    if dim == 0 && rank > 0 {
        return;
    }
    loop {
        f(&idx);
        let mut s = rank;
        loop {
            if s == 0 {
                return;
            }
            s -= 1;
            idx[s] += 1;
            if idx[s] < dim {
                break;
            }
            idx[s] = 0;
        }
    }
}

fn perm_sign(p: &[usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    sign
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

impl<S: Field> DenseTensor<S> {
    pub fn zeros(dim: usize, valence: (usize, usize)) -> Self {
        let len = dim.pow((valence.0 + valence.1) as u32);
        Self { dim, valence, data: vec![S::zero(); len] }
    }

    pub fn covariant(dim: usize, k: usize) -> Self {
        Self::zeros(dim, (0, k))
    }

    pub fn from_fn(dim: usize, valence: (usize, usize), mut f: impl FnMut(&[usize]) -> S) -> Self {
        let mut data = Vec::with_capacity(dim.pow((valence.0 + valence.1) as u32));
        for_each_index(dim, valence.0 + valence.1, |i| data.push(f(i)));
        Self { dim, valence, data }
    }

    pub fn from_vec(dim: usize, valence: (usize, usize), data: Vec<S>) -> Result<Self> {
        let len = dim.pow((valence.0 + valence.1) as u32);
        if data.len() != len {
            return Err(Error::Shape(format!("expected {len} components, got {}", data.len())));
        }
        Ok(Self { dim, valence, data })
    }

    /// Covariant 2-tensor from a matrix, `t[i][j] = m[(i,j)]`.
    pub fn from_matrix(m: &DMatrix<S>) -> Self {
        Self::from_fn(m.nrows(), (0, 2), |i| m[(i[0], i[1])])
    }

    /// Valence-(1,1) tensor of an endomorphism, `t[k][x] = m[(k,x)]`.
    pub fn from_endo(m: &DMatrix<S>) -> Self {
        Self::from_fn(m.nrows(), (1, 1), |i| m[(i[0], i[1])])
    }

    /// Covariant 1-tensor from a vector.
    pub fn from_vector(v: &DVector<S>) -> Self {
        Self::from_fn(v.len(), (0, 1), |i| v[i[0]])
    }

    pub fn to_matrix(&self) -> DMatrix<S> {
        assert_eq!(self.rank(), 2);
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.at(&[i, j]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn valence(&self) -> (usize, usize) {
        self.valence
    }

    pub fn rank(&self) -> usize {
        self.valence.0 + self.valence.1
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn at(&self, idx: &[usize]) -> S {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: S) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn add_at(&mut self, idx: &[usize], v: S) {
        let o = self.offset(idx);
        self.data[o] += v;
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.valence != other.valence {
            return Err(Error::Shape(format!(
                "dim/valence {}/{:?} vs {}/{:?}",
                self.dim, self.valence, other.dim, other.valence
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self { dim: self.dim, valence: self.valence, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn scale(&self, c: S) -> Self {
        self.map(|x| x * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other).expect("tensor shapes");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Self { dim: self.dim, valence: self.valence, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_same(other).expect("tensor shapes");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Self { dim: self.dim, valence: self.valence, data }
    }

    /// In-place `self += c * other`.
    pub fn axpy(&mut self, c: S, other: &Self) {
        self.check_same(other).expect("tensor shapes");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|x| x.conjugate())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.check_same(other).expect("tensor shapes");
        self.data.iter().zip(&other.data).map(|(&a, &b)| (a - b).modulus()).fold(0.0, f64::max)
    }

    /// Flat (unraised) Frobenius norm squared.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|x| x.modulus_squared()).sum()
    }

    /// Hermitian flat inner product Σ conj(a) b.
    pub fn dotc(&self, other: &Self) -> S {
        self.data.iter().zip(&other.data).fold(S::zero(), |acc, (&a, &b)| acc + a.conjugate() * b)
    }

    pub fn to_dvector(&self) -> DVector<S> {
        DVector::from_column_slice(&self.data)
    }

    pub fn from_dvector(dim: usize, valence: (usize, usize), v: &DVector<S>) -> Self {
        Self { dim, valence, data: v.as_slice().to_vec() }
    }

    /// numpy-style transpose: slot `a` of the result is slot `perm[a]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let k = self.rank();
        assert_eq!(perm.len(), k);
        let mut src = vec![0usize; k];
        Self::from_fn(self.dim, self.valence, |j| {
            for a in 0..k {
                src[perm[a]] = j[a];
            }
            self.at(&src)
        })
    }

    /// Precompose slot `slot` with the matrix `m`: the result at index x in
    /// that slot is Σ_k self[..k..] m[(k, x)]. For a covariant slot this is
    /// T(.., m e_x, ..).
    pub fn pull_slot(&self, slot: usize, m: &DMatrix<S>) -> Self {
        let d = self.dim;
        let k = self.rank();
        assert!(slot < k && m.nrows() == d && m.ncols() == d);
        let inner = d.pow((k - 1 - slot) as u32);
        let outer = d.pow(slot as u32);
        let mut out = vec![S::zero(); self.data.len()];
        for o in 0..outer {
            for x in 0..d {
                for kk in 0..d {
                    let c = m[(kk, x)];
                    if c == S::zero() {
                        continue;
                    }
                    let src = (o * d + kk) * inner;
                    let dst = (o * d + x) * inner;
                    for i in 0..inner {
                        out[dst + i] += self.data[src + i] * c;
                    }
                }
            }
        }
        Self { dim: d, valence: self.valence, data: out }
    }

    /// Applies `m` in every slot.
    pub fn pull_all(&self, m: &DMatrix<S>) -> Self {
        (0..self.rank()).fold(self.clone(), |t, s| t.pull_slot(s, m))
    }

    /// Derivation action of an endomorphism X on a covariant tensor:
    /// (X·T)(Y₁,…) = −Σ_i T(…, X Yᵢ, …).
    pub fn derivation(&self, x: &DMatrix<S>) -> Self {
        let mut out = Self::zeros(self.dim, self.valence);
        for s in 0..self.rank() {
            out.axpy(-S::one(), &self.pull_slot(s, x));
        }
        out
    }

    pub fn outer(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut data = Vec::with_capacity(self.data.len() * other.data.len());
        for &a in &self.data {
            for &b in &other.data {
                data.push(a * b);
            }
        }
        Self {
            dim: self.dim,
            valence: (self.valence.0 + other.valence.0, self.valence.1 + other.valence.1),
            data,
        }
    }

    /// Σ_σ sgn(σ) T∘σ over all slot permutations (no normalisation).
    pub fn alternation(&self) -> Self {
        let k = self.rank();
        let mut out = Self::zeros(self.dim, self.valence);
        for p in (0..k).permutations(k) {
            out.axpy(S::from_real(perm_sign(&p)), &self.permuted(&p));
        }
        out
    }

    /// Largest violation of antisymmetry under adjacent slot swaps.
    pub fn skew_residual(&self) -> f64 {
        let k = self.rank();
        let mut worst: f64 = 0.0;
        for s in 0..k.saturating_sub(1) {
            let mut p: Vec<usize> = (0..k).collect();
            p.swap(s, s + 1);
            worst = worst.max(self.add(&self.permuted(&p)).max_abs());
        }
        worst
    }

    /// Full evaluation on a list of vectors.
    pub fn contract_vectors(&self, vs: &[DVector<S>]) -> S {
        assert_eq!(vs.len(), self.rank());
        let mut acc = S::zero();
        for_each_index(self.dim, self.rank(), |i| {
            let mut c = self.at(i);
            for (v, &ii) in vs.iter().zip(i) {
                c *= v[ii];
            }
            acc += c;
        });
        acc
    }
}

impl RTensor {
    pub fn to_complex(&self) -> CTensor {
        CTensor { dim: self.dim, valence: self.valence, data: self.data.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }
}

impl CTensor {
    pub fn re(&self) -> RTensor {
        RTensor { dim: self.dim, valence: self.valence, data: self.data.iter().map(|z| z.re).collect() }
    }

    pub fn im(&self) -> RTensor {
        RTensor { dim: self.dim, valence: self.valence, data: self.data.iter().map(|z| z.im).collect() }
    }

    pub fn imag_max(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// Positive-definite metric with its cached inverse.
#[derive(Clone, Debug)]
pub struct MetricData {
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
}

impl MetricData {
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::Shape("metric must be square".into()));
        }
        let sym = (&g - g.transpose()).amax();
        if sym > 1e-12 * (1.0 + g.amax()) {
            return Err(Error::Structural(format!("metric symmetry residual {sym:e}")));
        }
        let ev = g.clone().symmetric_eigen().eigenvalues;
        if ev.min() <= 0.0 {
            return Err(Error::Structural(format!("metric not positive definite (min eigenvalue {})", ev.min())));
        }
        let ginv = g.clone().try_inverse().ok_or_else(|| Error::Structural("singular metric".into()))?;
        Ok(Self { g, ginv })
    }

    pub fn identity(dim: usize) -> Self {
        Self { g: DMatrix::identity(dim, dim), ginv: DMatrix::identity(dim, dim) }
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn ginv(&self) -> &DMatrix<f64> {
        &self.ginv
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.g * y))
    }

    pub fn as_tensor(&self) -> RTensor {
        RTensor::from_matrix(&self.g)
    }

    /// Columns of an orthonormal frame (Cholesky of the inverse metric).
    pub fn orthonormal_frame(&self) -> DMatrix<f64> {
        let l = self.ginv.clone().cholesky().expect("positive definite").l();
        l
    }

    /// Endomorphism A turned into the bilinear form (X,Y) ↦ g(AX,Y).
    pub fn lower_endo(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        a.transpose() * &self.g
    }

    /// Skew-adjointness residual of an endomorphism.
    pub fn skew_residual(&self, a: &DMatrix<f64>) -> f64 {
        let f = self.lower_endo(a);
        (&f + f.transpose()).amax()
    }

    /// Largest deviation of g(A·, A·) from g.
    pub fn orthogonality_residual(&self, a: &DMatrix<f64>) -> f64 {
        (a.transpose() * &self.g * a - &self.g).amax()
    }
}

/// Almost complex structure on the model space.
#[derive(Clone, Debug)]
pub struct ComplexStructureData {
    j: DMatrix<f64>,
}

impl ComplexStructureData {
    pub fn new(j: DMatrix<f64>) -> Result<Self> {
        let n = j.nrows();
        let r = (&j * &j + DMatrix::<f64>::identity(n, n)).amax();
        if r > 1e-10 {
            return Err(Error::Structural(format!("J² + 1 residual {r:e}")));
        }
        Ok(Self { j })
    }

    pub fn j(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn compatible_with(&self, g: &MetricData) -> f64 {
        g.orthogonality_residual(&self.j)
    }

    /// Projectors (1 ∓ iJ)/2 onto the (1,0) and (0,1) parts of covectors.
    pub fn type_projectors(&self) -> (DMatrix<C64>, DMatrix<C64>) {
        let n = self.j.nrows();
        let one = DMatrix::<C64>::identity(n, n);
        let ij = self.j.map(|x| C64::new(0.0, x));
        ((&one - &ij) * C64::new(0.5, 0.0), (&one + &ij) * C64::new(0.5, 0.0))
    }
}

fn require_covariant<S: Field>(t: &DenseTensor<S>, what: &str) -> Result<()> {
    if t.valence().0 != 0 {
        return Err(Error::Contract(format!("{what}: expected a covariant tensor")));
    }
    Ok(())
}

fn require_skew<S: Field>(t: &DenseTensor<S>, what: &str) -> Result<()> {
    require_covariant(t, what)?;
    let r = t.skew_residual();
    if r > 1e-10 * (1.0 + t.max_abs()) {
        return Err(Error::Contract(format!("{what}: form is not skew (residual {r:e})")));
    }
    Ok(())
}

/// Exterior product of a p-form and a q-form.
pub fn wedge<S: Field>(a: &DenseTensor<S>, b: &DenseTensor<S>) -> Result<DenseTensor<S>> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!("wedge of dims {} and {}", a.dim(), b.dim())));
    }
    require_skew(a, "wedge")?;
    require_skew(b, "wedge")?;
    let (p, q) = (a.rank(), b.rank());
    let norm = 1.0 / (factorial(p) * factorial(q));
    Ok(a.outer(b).alternation().scale(S::from_real(norm)))
}

/// Promote a real form for mixed-field wedges.
pub fn wedge_mixed(a: &RTensor, b: &CTensor) -> Result<CTensor> {
    wedge(&a.to_complex(), b)
}

/// The (p,q)-part of a k-form with respect to J.
pub fn pq_project<S: Field>(form: &DenseTensor<S>, j: &ComplexStructureData, p: usize, q: usize) -> Result<CTensor> {
    let k = form.rank();
    if p + q != k {
        return Err(Error::Contract(format!("p+q = {} but the form has degree {k}", p + q)));
    }
    if j.j().nrows() != form.dim() {
        return Err(Error::Shape("J and form dims differ".into()));
    }
    require_skew(form, "pq_project")?;
    let f = CTensor::from_fn(form.dim(), form.valence(), |i| {
        let x = form.at(i);
        C64::new(x.real(), x.imaginary())
    });
    let (p10, p01) = j.type_projectors();
    let mut out = CTensor::zeros(form.dim(), form.valence());
    for holo in (0..k).combinations(p) {
        let mut t = f.clone();
        for s in 0..k {
            t = t.pull_slot(s, if holo.contains(&s) { &p10 } else { &p01 });
        }
        out.axpy(C64::new(1.0, 0.0), &t);
    }
    Ok(out)
}

/// Tensorial norm squared: all indices raised (or lowered) with g.
pub fn tensor_norm_sq<S: Field>(t: &DenseTensor<S>, g: &MetricData) -> Result<f64> {
    if g.dim() != t.dim() {
        return Err(Error::Shape("metric and tensor dims differ".into()));
    }
    let (r, _) = t.valence();
    let gs = g.g().map(S::from_real);
    let gi = g.ginv().map(S::from_real);
    let mut raised = t.clone();
    for s in 0..t.rank() {
        raised = raised.pull_slot(s, if s < r { &gs } else { &gi });
    }
    Ok(t.dotc(&raised).real())
}

fn require_rank<S: Field>(t: &DenseTensor<S>, k: usize, what: &str) -> Result<()> {
    require_covariant(t, what)?;
    if t.rank() != k {
        return Err(Error::Shape(format!("{what}: expected a {k}-tensor, got rank {}", t.rank())));
    }
    Ok(())
}

/// (bR)(X,Y,Z,W) = cyclic sum of R over X,Y,Z.
pub fn bianchi_b<S: Field>(r: &DenseTensor<S>) -> Result<DenseTensor<S>> {
    require_rank(r, 4, "bianchi_b")?;
    Ok(DenseTensor::from_fn(r.dim(), (0, 4), |i| {
        r.at(&[i[0], i[1], i[2], i[3]]) + r.at(&[i[1], i[2], i[0], i[3]]) + r.at(&[i[2], i[0], i[1], i[3]])
    }))
}

/// g(T(X,Y), T(Z,W)) for a covariant 3-tensor T with T(X,Y) raised by g.
pub fn torsion_square<S: Field>(t: &DenseTensor<S>, g: &MetricData) -> Result<DenseTensor<S>> {
    require_rank(t, 3, "torsion_square")?;
    let d = t.dim();
    let gi = g.ginv().map(S::from_real);
    let tr = t.pull_slot(2, &gi);
    Ok(DenseTensor::from_fn(d, (0, 4), |i| {
        let mut acc = S::zero();
        for k in 0..d {
            acc += tr.at(&[i[0], i[1], k]) * t.at(&[i[2], i[3], k]);
        }
        acc
    }))
}

/// σ_T(X,Y,Z,W) = cyclic sum over X,Y,Z of g(T(X,Y),T(Z,W)).
pub fn sigma_t<S: Field>(t: &DenseTensor<S>, g: &MetricData) -> Result<DenseTensor<S>> {
    require_skew(t, "sigma_t")?;
    bianchi_b(&torsion_square(t, g)?)
}

/// Complex coframe element e^k = (dx_k + i dy_k)/√2 on interleaved ℝ^{2m}.
pub fn coframe(k: usize, dim: usize) -> CTensor {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CTensor::from_fn(dim, (0, 1), |i| {
        if i[0] == 2 * k {
            C64::new(s, 0.0)
        } else if i[0] == 2 * k + 1 {
            C64::new(0.0, s)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Complex frame vector e_k = (x_k − i y_k)/√2, dual to `coframe(k)`.
pub fn frame_vector(k: usize, dim: usize) -> DVector<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DVector::from_fn(dim, |i, _| {
        if i == 2 * k {
            C64::new(s, 0.0)
        } else if i == 2 * k + 1 {
            C64::new(0.0, -s)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Real basis 1-form e^i.
pub fn basis_covector(i: usize, dim: usize) -> RTensor {
    RTensor::from_fn(dim, (0, 1), |k| if k[0] == i { 1.0 } else { 0.0 })
}

/// Standard complex structure on interleaved ℝ^{2m}: x_k ↦ y_k.
pub fn standard_j(m: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * m, 2 * m);
    for k in 0..m {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge_of_basis_covectors() {
        let d = 4;
        let e = |i| basis_covector(i, d);
        let e12 = wedge(&e(0), &e(1)).unwrap();
        assert_eq!(e12.at(&[0, 1]), 1.0);
        assert_eq!(e12.at(&[1, 0]), -1.0);
        assert!(wedge(&e(0), &e(0)).unwrap().max_abs() == 0.0);
        let four = wedge(&e12, &wedge(&e(2), &e(3)).unwrap()).unwrap();
        assert!((four.at(&[0, 1, 2, 3]) - 1.0).abs() < 1e-15);
        assert!((four.at(&[1, 0, 2, 3]) + 1.0).abs() < 1e-15);
        let g = MetricData::identity(d);
        assert!((tensor_norm_sq(&e12, &g).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn wedge_rejects_non_skew_and_mismatch() {
        let a = RTensor::from_fn(3, (0, 2), |i| (i[0] + 2 * i[1]) as f64);
        assert!(wedge(&a, &basis_covector(0, 3)).is_err());
        assert!(wedge(&basis_covector(0, 3), &basis_covector(0, 4)).is_err());
    }

    #[test]
    fn pq_rejects_bad_degree() {
        let j = ComplexStructureData::new(standard_j(2)).unwrap();
        let f = wedge(&basis_covector(0, 4), &basis_covector(1, 4)).unwrap();
        assert!(pq_project(&f, &j, 2, 1).is_err());
    }

    #[test]
    fn kahler_form_is_type_11() {
        let j = ComplexStructureData::new(standard_j(3)).unwrap();
        let g = MetricData::identity(6);
        let omega = RTensor::from_matrix(&g.lower_endo(j.j()));
        let p11 = pq_project(&omega, &j, 1, 1).unwrap();
        assert!(p11.max_abs_diff(&omega.to_complex()) < 1e-15);
        assert!(pq_project(&omega, &j, 2, 0).unwrap().max_abs() < 1e-15);
        assert!(pq_project(&omega, &j, 0, 2).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn coframe_is_type_10_and_dual_to_frame() {
        let d = 6;
        let j = ComplexStructureData::new(standard_j(3)).unwrap();
        for k in 0..3 {
            let e = coframe(k, d);
            assert!(pq_project(&e, &j, 1, 0).unwrap().max_abs_diff(&e) < 1e-15);
            for l in 0..3 {
                let v = e.contract_vectors(&[frame_vector(l, d)]);
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((v - C64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn bianchi_of_zero_is_zero() {
        let r = RTensor::covariant(3, 4);
        assert_eq!(bianchi_b(&r).unwrap().max_abs(), 0.0);
        assert!(bianchi_b(&RTensor::covariant(3, 3)).is_err());
    }

    #[test]
    fn permuted_matches_index_convention() {
        let t = RTensor::from_fn(3, (0, 3), |i| (100 * i[0] + 10 * i[1] + i[2]) as f64);
        let p = t.permuted(&[2, 0, 1]);
        // slot a of the result is slot perm[a] of the input
        assert_eq!(p.at(&[1, 2, 0]), t.at(&[2, 0, 1]));
    }
}
