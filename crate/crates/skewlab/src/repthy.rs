//! Representation theory at Lie-algebra level: the embeddings ρ, ρ₂ of
//! sp(n)⊕u(1) into u(2n+1), induced actions on tensors, fixed subspaces,
//! stabilisers and the algebraic curvature space.
//!
//! The model space is ℝ^{4n+2} ≅ ℂ^{2n+1} with interleaved coordinates
//! (x₁,y₁,…), J x_k = y_k.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::multilinear::{bianchi_b, coframe, sigma_t, wedge, CTensor, MetricData, RTensor};
use crate::RANK_CUTOFF;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhoVariant {
    Rho,
    Rho2,
}

/// Real matrix Lie algebra acting on ℝ^dim.
#[derive(Clone, Debug)]
pub struct MatrixLieAlgebra {
    pub name: String,
    pub dim: usize,
    pub basis: Vec<DMatrix<f64>>,
}

impl MatrixLieAlgebra {
    pub fn new(name: impl Into<String>, dim: usize, basis: Vec<DMatrix<f64>>) -> Result<Self> {
        let alg = Self { name: name.into(), dim, basis };
        let r = linalg::rank(&alg.coordinate_matrix(), RANK_CUTOFF);
        if r != alg.basis.len() {
            return Err(Error::Structural(format!("{}: basis of {} elements has rank {r}", alg.name, alg.basis.len())));
        }
        Ok(alg)
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn vectors(&self) -> Vec<DVector<f64>> {
        self.basis.iter().map(linalg::vec_of).collect()
    }

    fn coordinate_matrix(&self) -> DMatrix<f64> {
        if self.basis.is_empty() {
            return DMatrix::zeros(self.dim * self.dim, 0);
        }
        linalg::hstack(&self.vectors())
    }

    /// Coordinates of `x` in the basis (least squares) and the residual.
    pub fn coordinates(&self, x: &DMatrix<f64>) -> (DVector<f64>, f64) {
        if self.basis.is_empty() {
            return (DVector::zeros(0), x.amax());
        }
        linalg::lstsq(&self.coordinate_matrix(), &linalg::vec_of(x))
    }

    /// Worst residual of projecting a bracket of basis elements back onto the span.
    pub fn closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, b) in self.basis.iter().tuple_combinations() {
            worst = worst.max(self.coordinates(&linalg::commutator(a, b)).1);
        }
        worst
    }

    /// Structure constants: [X_a, X_b] = Σ_c c[a][b][c] X_c.
    pub fn structure_constants(&self) -> Vec<Vec<DVector<f64>>> {
        self.basis
            .iter()
            .map(|a| self.basis.iter().map(|b| self.coordinates(&linalg::commutator(a, b)).0).collect())
            .collect()
    }

    /// Max-abs two-sided projection residual between the spans.
    pub fn subspace_distance(&self, other: &MatrixLieAlgebra) -> f64 {
        linalg::subspace_distance(&self.vectors(), &other.vectors(), RANK_CUTOFF)
    }

    /// Residual of `other ⊆ self`.
    pub fn containment_residual(&self, other: &MatrixLieAlgebra) -> f64 {
        let q = linalg::orth_span(&self.vectors(), RANK_CUTOFF);
        other
            .basis
            .iter()
            .map(|x| linalg::projection_residual(&q, &linalg::vec_of(x)) / x.amax().max(1e-300))
            .fold(0.0, f64::max)
    }

    /// Conjugate every element by the frame change E (columns = new basis).
    pub fn conjugated(&self, e: &DMatrix<f64>) -> Result<Self> {
        let ei = e.clone().try_inverse().ok_or_else(|| Error::Structural("singular frame".into()))?;
        Ok(Self { name: self.name.clone(), dim: self.dim, basis: self.basis.iter().map(|x| &ei * x * e).collect() })
    }
}

/// Quaternion a + bi + cj + dk as a complex 2×2 matrix.
pub fn quaternion_block(a: f64, b: f64, c: f64, d: f64) -> DMatrix<C64> {
    let al = C64::new(a, b);
    let be = C64::new(c, -d);
    DMatrix::from_row_slice(2, 2, &[al, -be.conj(), be, al.conj()])
}

/// Basis of sp(k) as complex 2k×2k matrices: for each diagonal quaternion
/// slot i, j, k; then for each pair l<m the units 1, i, j, k in block (l,m)
/// with minus the adjoint in block (m,l).
pub fn sp_basis(k: usize) -> Vec<DMatrix<C64>> {
    let units = [(1.0, 0.0, 0.0, 0.0), (0.0, 1.0, 0.0, 0.0), (0.0, 0.0, 1.0, 0.0), (0.0, 0.0, 0.0, 1.0)];
    let mut basis = Vec::new();
    for l in 0..k {
        for u in &units[1..] {
            let mut m = DMatrix::zeros(2 * k, 2 * k);
            m.view_mut((2 * l, 2 * l), (2, 2)).copy_from(&quaternion_block(u.0, u.1, u.2, u.3));
            basis.push(m);
        }
    }
    for l in 0..k {
        for m in l + 1..k {
            for u in &units {
                let q = quaternion_block(u.0, u.1, u.2, u.3);
                let mut x = DMatrix::zeros(2 * k, 2 * k);
                x.view_mut((2 * l, 2 * m), (2, 2)).copy_from(&q);
                x.view_mut((2 * m, 2 * l), (2, 2)).copy_from(&(-q.adjoint()));
                basis.push(x);
            }
        }
    }
    basis
}

/// Basis of u(m): i E_aa, then E_ab − E_ba and i(E_ab + E_ba) for a<b.
pub fn u_basis(m: usize) -> Vec<DMatrix<C64>> {
    let mut basis = Vec::new();
    for a in 0..m {
        let mut x = DMatrix::zeros(m, m);
        x[(a, a)] = C64::new(0.0, 1.0);
        basis.push(x);
    }
    for a in 0..m {
        for b in a + 1..m {
            let mut x = DMatrix::zeros(m, m);
            x[(a, b)] = C64::new(1.0, 0.0);
            x[(b, a)] = C64::new(-1.0, 0.0);
            basis.push(x);
            let mut y = DMatrix::zeros(m, m);
            y[(a, b)] = C64::new(0.0, 1.0);
            y[(b, a)] = C64::new(0.0, 1.0);
            basis.push(y);
        }
    }
    basis
}

/// Real 2m×2m matrix of a complex m×m matrix on interleaved coordinates.
pub fn realify(a: &DMatrix<C64>) -> DMatrix<f64> {
    let m = a.nrows();
    let mut r = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..a.ncols() {
            let z = a[(i, j)];
            r[(2 * i, 2 * j)] = z.re;
            r[(2 * i, 2 * j + 1)] = -z.im;
            r[(2 * i + 1, 2 * j)] = z.im;
            r[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    r
}

/// u(m) acting on ℝ^{2m}.
pub fn unitary_algebra(m: usize) -> MatrixLieAlgebra {
    MatrixLieAlgebra::new(format!("u({m})"), 2 * m, u_basis(m).iter().map(realify).collect())
        .expect("u(m) basis is independent")
}

/// Image of sp(n)⊕u(1) in u(2n+1) under ρ or ρ₂.
pub fn build_rho(n: usize, variant: RhoVariant) -> Result<MatrixLieAlgebra> {
    if n < 1 {
        return Err(Error::Parameter(format!("quaternionic rank must be >= 1, got {n}")));
    }
    let m = 2 * n + 1;
    let mut basis = Vec::new();
    for a in sp_basis(n) {
        let mut x = DMatrix::zeros(m, m);
        x.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&a);
        basis.push(realify(&x));
    }
    basis.push(realify(&u1_generator(n, variant)));
    let name = match variant {
        RhoVariant::Rho => "rho(sp(n)+u(1))",
        RhoVariant::Rho2 => "rho2(sp(n)+u(1))",
    };
    MatrixLieAlgebra::new(name, 2 * m, basis)
}

/// diag(i·1_{2n}, ±2i).
pub fn u1_generator(n: usize, variant: RhoVariant) -> DMatrix<C64> {
    let m = 2 * n + 1;
    let mut x = DMatrix::zeros(m, m);
    for k in 0..2 * n {
        x[(k, k)] = C64::new(0.0, 1.0);
    }
    x[(2 * n, 2 * n)] = C64::new(0.0, if variant == RhoVariant::Rho { 2.0 } else { -2.0 });
    x
}

/// T₀ = ω₀ ∧ ē^{2n+1}, ω₀ = Σ_k e^{2k−1} ∧ e^{2k}.
pub fn t0(n: usize) -> CTensor {
    let d = 4 * n + 2;
    let mut omega = CTensor::covariant(d, 2);
    for k in 0..n {
        omega.axpy(C64::new(1.0, 0.0), &wedge(&coframe(2 * k, d), &coframe(2 * k + 1, d)).expect("1-forms"));
    }
    wedge(&omega, &coframe(2 * n, d).conj()).expect("skew forms")
}

/// The real 3-form λT₀ + λ̄T̄₀.
pub fn torsion_family(n: usize, lambda: C64) -> RTensor {
    let t = t0(n).scale(lambda);
    t.add(&t.conj()).re()
}

/// Derivation action of X on a tensor of valence (r,s): X acts on vector
/// slots by X and on covector slots by −Xᵀ.
pub fn act(x: &DMatrix<f64>, t: &CTensor) -> CTensor {
    let xc = linalg::complexify(x);
    let xt = xc.transpose();
    let (r, _) = t.valence();
    let mut out = CTensor::zeros(t.dim(), t.valence());
    for s in 0..t.rank() {
        if s < r {
            out.axpy(C64::new(1.0, 0.0), &t.pull_slot(s, &xt));
        } else {
            out.axpy(C64::new(-1.0, 0.0), &t.pull_slot(s, &xc));
        }
    }
    out
}

/// Which tensors the action is restricted to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PqFilter {
    /// The full complex tensor space of the valence.
    Full,
    /// Complex forms of type (p,q).
    Complex(usize, usize),
    /// Real forms of type (p,q) ⊕ (q,p).
    RealPair(usize, usize),
}

/// The carrier space, with a flat-orthonormal basis.
#[derive(Clone, Debug)]
pub struct Carrier {
    pub valence: (usize, usize),
    pub dim: usize,
    pub complex: bool,
    pub basis: Vec<CTensor>,
}

#[derive(Clone, Debug)]
pub struct RepAction {
    pub carrier: Carrier,
    pub generators: Vec<DMatrix<C64>>,
    /// How far X·b leaves the carrier, worst case.
    pub leak: f64,
}

fn pq_basis(dim: usize, p: usize, q: usize) -> Vec<CTensor> {
    let m = dim / 2;
    let one = |k| coframe(k, dim);
    let mut out = Vec::new();
    for holo in (0..m).combinations(p) {
        for anti in (0..m).combinations(q) {
            let mut f = CTensor::from_fn(dim, (0, 0), |_| C64::new(1.0, 0.0));
            for &k in &holo {
                f = if f.rank() == 0 { one(k) } else { wedge(&f, &one(k)).expect("forms") };
            }
            for &k in &anti {
                let e = one(k).conj();
                f = if f.rank() == 0 { e } else { wedge(&f, &e).expect("forms") };
            }
            let nrm = f.frobenius_sq().sqrt();
            out.push(f.scale(C64::new(1.0 / nrm, 0.0)));
        }
    }
    out
}

/// Generator-wise derivation action on the chosen carrier.
pub fn induced_action(alg: &MatrixLieAlgebra, valence: (usize, usize), filter: PqFilter) -> Result<RepAction> {
    let d = alg.dim;
    let k = valence.0 + valence.1;
    let (basis, complex) = match filter {
        PqFilter::Full => {
            let n = d.pow(k as u32);
            if n > 4096 {
                return Err(Error::Parameter(format!("full carrier of dimension {n} is too large")));
            }
            let b = (0..n)
                .map(|i| {
                    let mut v = DVector::zeros(n);
                    v[i] = C64::new(1.0, 0.0);
                    CTensor::from_dvector(d, valence, &v)
                })
                .collect();
            (b, true)
        }
        PqFilter::Complex(p, q) => {
            if valence != (0, p + q) {
                return Err(Error::Contract("(p,q) carriers are covariant of degree p+q".into()));
            }
            (pq_basis(d, p, q), true)
        }
        PqFilter::RealPair(p, q) => {
            if valence != (0, p + q) {
                return Err(Error::Contract("(p,q) carriers are covariant of degree p+q".into()));
            }
            let mut reals = Vec::new();
            for b in pq_basis(d, p, q) {
                reals.push(b.add(&b.conj()).re().to_complex());
                reals.push(b.sub(&b.conj()).scale(C64::new(0.0, -1.0)).re().to_complex());
            }
            let vecs: Vec<DVector<f64>> = reals.iter().map(|t| t.re().to_dvector()).collect();
            let q = linalg::orth_span(&vecs, RANK_CUTOFF);
            (q.iter().map(|v| RTensor::from_dvector(d, valence, v).to_complex()).collect(), false)
        }
    };
    let nb = basis.len();
    let mut leak: f64 = 0.0;
    let mut generators = Vec::with_capacity(alg.len());
    for x in &alg.basis {
        let mut op = DMatrix::zeros(nb, nb);
        for (j, b) in basis.iter().enumerate() {
            let img = act(x, b);
            let mut rest = img.clone();
            for (i, bi) in basis.iter().enumerate() {
                let c = bi.dotc(&img);
                op[(i, j)] = c;
                rest.axpy(-c, bi);
            }
            leak = leak.max(rest.max_abs());
        }
        generators.push(op);
    }
    Ok(RepAction { carrier: Carrier { valence, dim: d, complex, basis }, generators, leak })
}

impl RepAction {
    /// Worst residual of op([X,Y]) = [op X, op Y] over basis pairs.
    pub fn bracket_residual(&self, alg: &MatrixLieAlgebra) -> f64 {
        let c = alg.structure_constants();
        let mut worst: f64 = 0.0;
        for a in 0..alg.len() {
            for b in 0..alg.len() {
                let mut lhs = DMatrix::<C64>::zeros(self.carrier.basis.len(), self.carrier.basis.len());
                for (k, op) in self.generators.iter().enumerate() {
                    lhs += op * C64::new(c[a][b][k], 0.0);
                }
                let rhs = linalg::commutator(&self.generators[a], &self.generators[b]);
                worst = worst.max((lhs - rhs).camax());
            }
        }
        worst
    }
}

/// Joint kernel of all generators, as tensors (flat-orthonormal).
pub fn fixed_subspace(action: &RepAction) -> Vec<CTensor> {
    let nb = action.carrier.basis.len();
    let ng = action.generators.len();
    let coeffs: Vec<DVector<C64>> = if ng == 0 {
        (0..nb).map(|i| DVector::from_fn(nb, |k, _| C64::new(if k == i { 1.0 } else { 0.0 }, 0.0))).collect()
    } else if action.carrier.complex {
        let mut stacked = DMatrix::<C64>::zeros(nb * ng, nb);
        for (g, op) in action.generators.iter().enumerate() {
            stacked.rows_mut(g * nb, nb).copy_from(op);
        }
        linalg::null_space(&stacked, RANK_CUTOFF)
    } else {
        let mut stacked = DMatrix::<f64>::zeros(nb * ng, nb);
        for (g, op) in action.generators.iter().enumerate() {
            stacked.rows_mut(g * nb, nb).copy_from(&op.map(|z| z.re));
        }
        linalg::null_space(&stacked, RANK_CUTOFF).iter().map(|v| v.map(|x| C64::new(x, 0.0))).collect()
    };
    let c = &action.carrier;
    coeffs
        .iter()
        .map(|v| {
            let mut t = CTensor::zeros(c.dim, c.valence);
            for (i, b) in c.basis.iter().enumerate() {
                t.axpy(v[i], b);
            }
            t
        })
        .collect()
}

/// {X ∈ ambient : X·T = 0}. Coefficients are real, so the kernel is taken
/// over ℝ by stacking real and imaginary parts.
pub fn stabilizer_algebra(t: &CTensor, ambient: &MatrixLieAlgebra) -> Result<MatrixLieAlgebra> {
    if t.dim() != ambient.dim {
        return Err(Error::Shape("tensor and algebra act on different spaces".into()));
    }
    let cols: Vec<DVector<f64>> = ambient
        .basis
        .iter()
        .map(|x| {
            let img = act(x, t);
            let re = img.re().to_dvector();
            let im = img.im().to_dvector();
            DVector::from_iterator(re.len() * 2, re.iter().chain(im.iter()).copied())
        })
        .collect();
    let kernel = linalg::null_space(&linalg::hstack(&cols), RANK_CUTOFF);
    let basis = kernel
        .iter()
        .map(|v| ambient.basis.iter().zip(v.iter()).fold(DMatrix::zeros(ambient.dim, ambient.dim), |acc, (x, &c)| acc + x * c))
        .collect();
    let alg = MatrixLieAlgebra::new(format!("stab in {}", ambient.name), ambient.dim, basis)?;
    let closure = alg.closure_residual();
    if closure > 1e-8 {
        return Err(Error::Structural(format!("stabiliser not closed (residual {closure:e})")));
    }
    Ok(alg)
}

/// The algebraic curvature space S²(𝔨) ∩ b⁻¹(ℝσ).
#[derive(Clone, Debug)]
pub struct CurvatureSpace {
    /// Flat-orthonormal basis of the solution space.
    pub basis: Vec<RTensor>,
    /// dim S²(𝔨).
    pub s2_dim: usize,
    /// dim of ker b on S²(𝔨).
    pub ker_b_dim: usize,
    pub sigma: RTensor,
}

impl CurvatureSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn projection_residual(&self, r: &RTensor) -> f64 {
        let q: Vec<DVector<f64>> = self.basis.iter().map(|b| b.to_dvector()).collect();
        linalg::projection_residual(&q, &r.to_dvector())
    }
}

/// Symmetric products of the ρ-algebra viewed as 2-forms F(X,Y) = ⟨AX,Y⟩,
/// intersected with the preimage under b of the line through σ_{T₀+T̄₀}.
pub fn curvature_space(n: usize) -> Result<CurvatureSpace> {
    let alg = build_rho(n, RhoVariant::Rho)?;
    let d = alg.dim;
    let forms: Vec<RTensor> = alg.basis.iter().map(|a| RTensor::from_matrix(&a.transpose())).collect();
    let mut sym = Vec::new();
    for a in 0..forms.len() {
        for b in a..forms.len() {
            let mut s = forms[a].outer(&forms[b]);
            if a != b {
                s = s.add(&forms[b].outer(&forms[a]));
            }
            sym.push(s);
        }
    }
    let g = MetricData::identity(d);
    let sigma = sigma_t(&torsion_family(n, C64::new(1.0, 0.0)), &g)?;
    let bcols: Vec<DVector<f64>> = sym.iter().map(|s| bianchi_b(s).map(|t| t.to_dvector())).collect::<Result<_>>()?;
    let ker_b_dim = linalg::null_space(&linalg::hstack(&bcols), RANK_CUTOFF).len();
    let mut cols = bcols.clone();
    cols.push(-sigma.to_dvector());
    let kernel = linalg::null_space(&linalg::hstack(&cols), RANK_CUTOFF);
    let tensors: Vec<DVector<f64>> = kernel
        .iter()
        .map(|v| sym.iter().zip(v.iter()).fold(DVector::zeros(d.pow(4)), |acc, (s, &c)| acc + s.to_dvector() * c))
        .collect();
    let basis = linalg::orth_span(&tensors, RANK_CUTOFF).iter().map(|v| RTensor::from_dvector(d, (0, 4), v)).collect();
    Ok(CurvatureSpace { basis, s2_dim: sym.len(), ker_b_dim, sigma })
}
