//! The Hermitian connection with totally skew-symmetric torsion, its
//! curvature and Ricci identities, the curvature decomposition over the
//! quaternionic model and the holonomy algebra.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::homog::{
    covariant_derivative_invariant, curvature_endos, exterior_derivative, levi_civita, lower_curvature, ricci_scalar,
    torsion_lowered, ConnectionMap, HomogeneousSpace,
};
use crate::linalg::{self, C64};
use crate::multilinear::{tensor_norm_sq, torsion_square, ComplexStructureData, MetricData, RTensor};
use crate::repthy::MatrixLieAlgebra;
use crate::twistor::SplitHermitianStructure;

/// N(X,Y) = [JX,JY] − J[JX,Y] − J[X,JY] − [X,Y] with 𝔪-projected brackets,
/// lowered: N(X,Y,Z) = g(N(X,Y),Z).
pub fn nijenhuis(space: &HomogeneousSpace, j: &ComplexStructureData) -> RTensor {
    let d = space.dim();
    let jm = j.j();
    let g = space.g();
    let e = |i: usize| DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 });
    let mut vals = Vec::with_capacity(d * d);
    for x in 0..d {
        for y in 0..d {
            let (ex, ey) = (e(x), e(y));
            let (jx, jy) = (jm * &ex, jm * &ey);
            let n = space.bracket_m(&jx, &jy)
                - jm * space.bracket_m(&jx, &ey)
                - jm * space.bracket_m(&ex, &jy)
                - space.bracket_m(&ex, &ey);
            vals.push(g * n);
        }
    }
    RTensor::from_fn(d, (0, 3), |i| vals[i[0] * d + i[1]][i[2]])
}

/// Ω(X,Y) = g(JX,Y).
pub fn kahler_form(g: &MetricData, j: &ComplexStructureData) -> RTensor {
    RTensor::from_matrix(&g.lower_endo(j.j()))
}

/// d^cΩ(X,Y,Z) = −dΩ(JX,JY,JZ).
pub fn dc_omega(space: &HomogeneousSpace, j: &ComplexStructureData) -> RTensor {
    let omega = kahler_form(&space.metric, j);
    exterior_derivative(space, &omega).pull_all(j.j()).scale(-1.0)
}

/// Basis of 3-forms e^a∧e^b∧e^c, a<b<c, in the determinant convention.
fn three_form_basis(d: usize) -> Vec<RTensor> {
    (0..d)
        .combinations(3)
        .map(|c| {
            let mut t = RTensor::covariant(d, 3);
            for p in (0..3).permutations(3) {
                let sign = if [[0, 1, 2], [1, 2, 0], [2, 0, 1]].iter().any(|q| q[..] == p[..]) { 1.0 } else { -1.0 };
                t.set(&[c[p[0]], c[p[1]], c[p[2]]], sign);
            }
            t
        })
        .collect()
}

/// The 3-form T with [Λ(X), J] + ½[T_X, J] = 0 for all X, where
/// T_X Y = T(X,Y,·)♯; solved by least squares, independently of the
/// closed form −d^cΩ + N. Returns T and the residual of the linear system.
pub fn solve_hermitian_torsion(space: &HomogeneousSpace, lc: &ConnectionMap, j: &ComplexStructureData) -> (RTensor, f64) {
    let d = space.dim();
    let gi = space.metric.ginv();
    let jm = j.j();
    let basis = three_form_basis(d);
    let block = |t: &RTensor| {
        let mut col = Vec::with_capacity(d * d * d);
        for x in 0..d {
            let tx = DMatrix::from_fn(d, d, |k, y| (0..d).map(|z| gi[(k, z)] * t.at(&[x, y, z])).sum::<f64>());
            col.extend((linalg::commutator(&tx, jm) * 0.5).iter().copied());
        }
        DVector::from_vec(col)
    };
    let a = DMatrix::from_columns(&basis.iter().map(block).collect::<Vec<_>>());
    let mut rhs = Vec::with_capacity(d * d * d);
    for l in &lc.maps {
        rhs.extend((-linalg::commutator(l, jm)).iter().copied());
    }
    let (sol, res) = linalg::lstsq(&a, &DVector::from_vec(rhs));
    let mut t = RTensor::covariant(d, 3);
    for (c, b) in sol.iter().zip(&basis) {
        t.axpy(*c, b);
    }
    (t, res)
}

/// Everything attached to the canonical Hermitian connection.
#[derive(Clone, Debug)]
pub struct CanonicalTorsionPackage {
    pub ta: RTensor,
    pub lc: ConnectionMap,
    pub conn_a: ConnectionMap,
    pub omega: RTensor,
    pub n: RTensor,
    pub dc_omega: RTensor,
    /// Least-squares residual of the independent Hermitian torsion solve.
    pub solve_residual: f64,
    /// Max deviation between the solved torsion and −d^cΩ + N.
    pub solve_mismatch: f64,
}

impl CanonicalTorsionPackage {
    /// Worst residual over Tᵃ = −d^cΩ + N, metricity, ∇ᵃJ = 0 and
    /// torsion(∇ᵃ) = Tᵃ.
    pub fn invariant_residual(&self, space: &HomogeneousSpace, j: &ComplexStructureData) -> f64 {
        let closed = self.n.sub(&self.dc_omega);
        let mut worst = self.ta.max_abs_diff(&closed);
        worst = worst.max(self.conn_a.metric_residual(&space.metric));
        for l in &self.conn_a.maps {
            worst = worst.max(linalg::commutator(l, j.j()).amax());
        }
        worst.max(torsion_lowered(space, &self.conn_a).max_abs_diff(&self.ta))
    }
}

/// ∇ᵃ = ∇ + ½Tᵃ with Tᵃ = −d^cΩ + N; fails when N is not totally skew.
pub fn canonical_connection(space: &HomogeneousSpace, j: &ComplexStructureData) -> Result<CanonicalTorsionPackage> {
    let n = nijenhuis(space, j);
    let skew = n.skew_residual();
    if skew > 1e-9 * (1.0 + n.max_abs()) {
        return Err(Error::OutsideG1(skew));
    }
    let dc = dc_omega(space, j);
    let ta = n.sub(&dc);
    let lc = levi_civita(space);
    let (solved, solve_residual) = solve_hermitian_torsion(space, &lc, j);
    let conn_a = lc.add_torsion(&ta, &space.metric);
    Ok(CanonicalTorsionPackage {
        solve_mismatch: solved.max_abs_diff(&ta),
        ta,
        lc,
        conn_a,
        omega: kahler_form(&space.metric, j),
        n,
        dc_omega: dc,
        solve_residual,
    })
}

/// Curvature of an invariant connection, lowered.
pub fn curvature_of(space: &HomogeneousSpace, conn: &ConnectionMap) -> RTensor {
    lower_curvature(&curvature_endos(space, conn), space.g())
}

/// Rᵃ − R − ½g(T(X,Y),T(Z,W)) − ¼g(T(Y,Z),T(X,W)) + ¼g(T(X,Z),T(Y,W)),
/// valid when Tᵃ is ∇ᵃ-parallel.
pub fn curvature_relation_check(r: &RTensor, ra: &RTensor, ta: &RTensor, g: &MetricData) -> Result<f64> {
    let tt = torsion_square(ta, g)?;
    let rel = RTensor::from_fn(r.dim(), (0, 4), |i| {
        let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
        r.at(i) + 0.5 * tt.at(&[x, y, z, w]) + 0.25 * tt.at(&[y, z, x, w]) - 0.25 * tt.at(&[x, z, y, w])
    });
    Ok(ra.max_abs_diff(&rel))
}

/// The relation between Rᵃ and R for ∇ᵃ = ∇ + ½T without assuming parallel
/// torsion: Rᵃ = R + ½(∇_X T)(Y,Z,W) − ½(∇_Y T)(X,Z,W)
/// − ¼g(T(X,W),T(Y,Z)) + ¼g(T(Y,W),T(X,Z)).
pub fn curvature_relation_general(r: &RTensor, ra: &RTensor, ta: &RTensor, lc: &ConnectionMap, g: &MetricData) -> Result<f64> {
    let tt = torsion_square(ta, g)?;
    let dt = covariant_derivative_invariant(lc, ta);
    let rel = RTensor::from_fn(r.dim(), (0, 4), |i| {
        let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
        r.at(i) + 0.5 * dt.at(&[x, y, z, w]) - 0.5 * dt.at(&[y, x, z, w]) - 0.25 * tt.at(&[x, w, y, z])
            + 0.25 * tt.at(&[y, w, x, z])
    });
    Ok(ra.max_abs_diff(&rel))
}

/// 𝔖_{X,Y,Z} Rᵃ(U,V,X,Tᵃ(Y,Z)).
pub fn torsion_annihilation_residual(ra: &RTensor, ta: &RTensor, g: &MetricData) -> f64 {
    let d = ra.dim();
    let tv = ta.pull_slot(2, g.ginv());
    let mut worst: f64 = 0.0;
    let f = |u: usize, v: usize, x: usize, y: usize, z: usize| (0..d).map(|k| ra.at(&[u, v, x, k]) * tv.at(&[y, z, k])).sum::<f64>();
    for u in 0..d {
        for v in 0..d {
            for x in 0..d {
                for y in 0..d {
                    for z in 0..d {
                        worst = worst.max((f(u, v, x, y, z) + f(u, v, y, z, x) + f(u, v, z, x, y)).abs());
                    }
                }
            }
        }
    }
    worst
}

/// r(X,Y) = g(T(X,·),T(Y,·)) = Σ T(X,a,b)T(Y,c,d)g^{ac}g^{bd}.
pub fn torsion_ricci(ta: &RTensor, g: &MetricData) -> DMatrix<f64> {
    let d = ta.dim();
    let gi = g.ginv();
    let raised = ta.pull_slot(1, gi).pull_slot(2, gi);
    DMatrix::from_fn(d, d, |x, y| {
        let mut s = 0.0;
        for a in 0..d {
            for b in 0..d {
                s += ta.at(&[x, a, b]) * raised.at(&[y, a, b]);
            }
        }
        s
    })
}

/// Residuals of the Ricci identities at t₁.
#[derive(Clone, Debug, Default)]
pub struct RicciResiduals {
    pub ric_a: f64,
    pub s_a: f64,
    pub ric: f64,
    pub s: f64,
    /// Ricᵃ = Ric − ¼rᵃ.
    pub ric_relation: f64,
    /// sᵃ = s − |Tᵃ|²/4.
    pub s_relation: f64,
    pub min_eig_ric_a: f64,
    pub min_eig_ric: f64,
    /// Eigenvalues of g⁻¹Ric on ℋ and 𝒱 (averaged traces).
    pub ric_h: f64,
    pub ric_v: f64,
    pub s_value: f64,
    pub einstein: f64,
}

fn min_eig(ric: &DMatrix<f64>, g: &MetricData) -> f64 {
    let l = g.orthonormal_frame();
    let m = l.transpose() * ric * &l;
    m.symmetric_eigenvalues().min()
}

pub fn ricci_formulas_check(
    r: &RTensor,
    ra: &RTensor,
    ta: &RTensor,
    split: &SplitHermitianStructure,
) -> Result<RicciResiduals> {
    let g = &split.g;
    let n = split.n as f64;
    let t2 = tensor_norm_sq(ta, g)?;
    let (rica, sa) = ricci_scalar(ra, g);
    let (ric, s) = ricci_scalar(r, g);
    let (gh, gv) = (split.g_h(), split.g_v());
    let rica_pred = (&gh * (n + 1.0) + &gv * 2.0) * (t2 / (12.0 * n));
    let ric_pred = (&gh * (2.0 * n + 3.0) + &gv * (n + 4.0)) * (t2 / (24.0 * n));
    let ra_t = torsion_ricci(ta, g);
    let hd = split.hdim();
    let d = split.dim();
    let gi = g.ginv();
    let ric_end = gi * &ric;
    let ric_h = (0..hd).map(|i| ric_end[(i, i)]).sum::<f64>() / hd as f64;
    let ric_v = (hd..d).map(|i| ric_end[(i, i)]).sum::<f64>() / (d - hd) as f64;
    Ok(RicciResiduals {
        ric_a: (&rica - rica_pred).amax(),
        s_a: (sa - (n * n + n + 1.0) * t2 / (3.0 * n)).abs(),
        ric: (&ric - ric_pred).amax(),
        s: (s - (4.0 * n * n + 7.0 * n + 4.0) * t2 / (12.0 * n)).abs(),
        ric_relation: (&rica - (&ric - ra_t * 0.25)).amax(),
        s_relation: (sa - (s - t2 / 4.0)).abs(),
        min_eig_ric_a: min_eig(&rica, g),
        min_eig_ric: min_eig(&ric, g),
        ric_h,
        ric_v,
        s_value: s,
        einstein: (&ric - g.g() * (s / d as f64)).amax(),
    })
}

/// The model tensor R₀ᵃ on the split structure.
pub fn r0a(split: &SplitHermitianStructure) -> RTensor {
    let gh = split.g_h();
    let gv = split.g_v();
    let j = split.j.j();
    let ls = [split.h_proj.clone(), split.i.clone(), split.j_h(), split.k.clone()];
    let forms: Vec<DMatrix<f64>> = ls.iter().map(|l| l.transpose() * &gh).collect();
    let fh = j.transpose() * &gh;
    let fv = j.transpose() * &gv;
    RTensor::from_fn(split.dim(), (0, 4), |i| {
        let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
        let mut v = 0.0;
        for f in &forms {
            v += f[(y, z)] * f[(x, w)] - f[(x, z)] * f[(y, w)];
        }
        v - 2.0
            * (fh[(x, y)] * fh[(z, w)]
                + 2.0 * fh[(x, y)] * fv[(z, w)]
                + 2.0 * fv[(x, y)] * fh[(z, w)]
                + 4.0 * fv[(x, y)] * fv[(z, w)])
    })
}

/// The model tensor R₀ for the Levi-Civita curvature.
pub fn r0_levi_civita(split: &SplitHermitianStructure) -> RTensor {
    let gh = split.g_h();
    let gv = split.g_v();
    let jh = split.j_h();
    let quat = [&split.i, &jh, &split.k];
    let hp = crate::homog::r_hpn(&gh, &quat);
    let fi = split.i.transpose() * &gh;
    let fk = split.k.transpose() * &gh;
    let j = split.j.j();
    let fh = j.transpose() * &gh;
    let fv = j.transpose() * &gv;
    RTensor::from_fn(split.dim(), (0, 4), |i| {
        let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
        let mut v = hp.at(i);
        for f in [&fi, &fk] {
            v -= 0.5 * (f[(y, z)] * f[(x, w)] - f[(x, z)] * f[(y, w)] - 2.0 * f[(x, y)] * f[(z, w)]);
        }
        v += 0.5 * (gh[(y, z)] * gv[(x, w)] + gv[(y, z)] * gh[(x, w)] - gh[(x, z)] * gv[(y, w)] - gv[(x, z)] * gh[(y, w)]);
        v += 1.5
            * (fh[(y, z)] * fv[(x, w)] + fv[(y, z)] * fh[(x, w)]
                - fh[(x, z)] * fv[(y, w)]
                - fv[(x, z)] * fh[(y, w)]
                - 2.0 * fh[(x, y)] * fv[(z, w)]
                - 2.0 * fv[(x, y)] * fh[(z, w)]);
        v - 8.0 * fv[(x, y)] * fv[(z, w)]
    })
}

#[derive(Clone, Debug)]
pub struct CurvatureDecomposition {
    pub coefficient: f64,
    pub r0a: RTensor,
    pub r_hyper: RTensor,
}

impl CurvatureDecomposition {
    /// Largest component of R_hyper with at least one vertical slot.
    pub fn vertical_residual(&self, hdim: usize) -> f64 {
        let mut worst: f64 = 0.0;
        crate::multilinear::for_each_index(self.r_hyper.dim(), 4, |i| {
            if i.iter().any(|&k| k >= hdim) {
                worst = worst.max(self.r_hyper.at(i).abs());
            }
        });
        worst
    }

    /// Largest deviation of R_hyper(X,Y) from commuting with I, J, K on ℋ.
    pub fn quaternionic_residual(&self, split: &SplitHermitianStructure) -> f64 {
        let jh = split.j_h();
        let mut worst: f64 = 0.0;
        for l in [&split.i, &jh, &split.k] {
            // R(X,Y,LZ,LW) − R(X,Y,Z,W)
            let rotated = self.r_hyper.pull_slot(2, l).pull_slot(3, l);
            worst = worst.max(rotated.max_abs_diff(&self.r_hyper));
        }
        worst
    }

    /// Largest |Ric(R_hyper)| restricted to ℋ.
    pub fn ricci_residual(&self, g: &MetricData) -> f64 {
        ricci_scalar(&self.r_hyper, g).0.amax()
    }
}

pub fn decompose_curvature(ra: &RTensor, ta: &RTensor, split: &SplitHermitianStructure) -> Result<CurvatureDecomposition> {
    let t2 = tensor_norm_sq(ta, &split.g)?;
    let coefficient = t2 / (48.0 * split.n as f64);
    let r0 = r0a(split);
    let r_hyper = ra.sub(&r0.scale(coefficient));
    Ok(CurvatureDecomposition { coefficient, r0a: r0, r_hyper })
}

/// Lie algebra generated by the curvature operators and their covariant
/// derivatives.
#[derive(Clone, Debug)]
pub struct HolonomyAlgebra {
    /// Frobenius-orthonormal basis.
    pub basis: Vec<DMatrix<f64>>,
    /// For each basis element, how it first appeared.
    pub generation_log: Vec<String>,
    pub rounds: usize,
}

impl HolonomyAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn as_lie_algebra(&self) -> Result<MatrixLieAlgebra> {
        let d = self.basis.first().map(|m| m.nrows()).unwrap_or(0);
        MatrixLieAlgebra::new("hol", d, self.basis.clone())
    }

    pub fn closure_residual(&self) -> f64 {
        let vs: Vec<DVector<f64>> = self.basis.iter().map(linalg::vec_of).collect();
        let mut worst: f64 = 0.0;
        for a in &self.basis {
            for b in &self.basis {
                worst = worst.max(linalg::projection_residual(&vs, &linalg::vec_of(&linalg::commutator(a, b))));
            }
        }
        worst
    }

    pub fn metric_residual(&self, g: &MetricData) -> f64 {
        self.basis.iter().map(|a| g.skew_residual(a)).fold(0.0, f64::max)
    }

    pub fn j_residual(&self, j: &DMatrix<f64>) -> f64 {
        self.basis.iter().map(|a| linalg::commutator(a, j).amax()).fold(0.0, f64::max)
    }
}

struct SpanBuilder {
    vs: Vec<DVector<f64>>,
    mats: Vec<DMatrix<f64>>,
    log: Vec<String>,
    cut: f64,
}

impl SpanBuilder {
    fn offer(&mut self, m: DMatrix<f64>, label: impl FnOnce() -> String) -> bool {
        let mut v = linalg::vec_of(&m);
        for _ in 0..2 {
            for b in &self.vs {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        let nrm = v.norm();
        if nrm <= self.cut {
            return false;
        }
        v /= nrm;
        let rows = m.nrows();
        self.mats.push(linalg::unvec(&v, rows, rows));
        self.vs.push(v);
        self.log.push(label());
        true
    }
}

/// Seeds with all Rᵃ(e_x,e_y), then closes under brackets and under
/// A ↦ [Λᵃ(e_x), A] until the dimension is stable.
pub fn holonomy_algebra(space: &HomogeneousSpace, conn: &ConnectionMap) -> Result<HolonomyAlgebra> {
    let d = space.dim();
    let endos = curvature_endos(space, conn);
    let scale = endos.iter().map(|m| m.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut sb = SpanBuilder { vs: Vec::new(), mats: Vec::new(), log: Vec::new(), cut: 1e-9 * scale };
    for x in 0..d {
        for y in x + 1..d {
            sb.offer(endos[x * d + y].clone(), || format!("R(e{x},e{y})"));
        }
    }
    let cap = 2 * d * d;
    let mut rounds = 0;
    loop {
        if rounds >= cap {
            return Err(Error::NonConvergence(rounds, sb.mats.len()));
        }
        rounds += 1;
        let current = sb.mats.len();
        for a in 0..current {
            for b in a + 1..current {
                let c = linalg::commutator(&sb.mats[a], &sb.mats[b]);
                sb.offer(c, || format!("[h{a},h{b}]"));
            }
            for x in 0..d {
                let c = linalg::commutator(&conn.maps[x], &sb.mats[a]);
                sb.offer(c, || format!("[L(e{x}),h{a}]"));
            }
        }
        log::debug!("holonomy round {rounds}: dimension {}", sb.mats.len());
        if sb.mats.len() == current {
            break;
        }
    }
    Ok(HolonomyAlgebra { basis: sb.mats, generation_log: sb.log, rounds })
}

/// Σ_k Rᵃ(e_k, Je_k) over a g-orthonormal frame.
pub fn u1_trace(space: &HomogeneousSpace, conn: &ConnectionMap, j: &DMatrix<f64>) -> DMatrix<f64> {
    let d = space.dim();
    let endos = curvature_endos(space, conn);
    let e = space.metric.orthonormal_frame();
    let mut s = DMatrix::zeros(d, d);
    for k in 0..d {
        let x = e.column(k);
        let y = j * x;
        for a in 0..d {
            for b in 0..d {
                let c = x[a] * y[b];
                if c != 0.0 {
                    s += &endos[a * d + b] * c;
                }
            }
        }
    }
    s
}

/// Adapted orthonormal frame (columns): (u, Ju, Ku, JKu) per quaternionic
/// line of ℋ, then (x, Jx) on 𝒱 rotated so that λ = Tᵃ(e₁,e₂,ē_{2n+1}) is real
/// and non-negative. Returns the frame and λ before the rotation.
pub fn adapted_frame(split: &SplitHermitianStructure, ta: &RTensor) -> (DMatrix<f64>, C64) {
    let d = split.dim();
    let n = split.n;
    let g = split.g.g();
    let j = split.j.j();
    let ip = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * g * b)[(0, 0)];
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for _ in 0..n {
        let mut u = DVector::zeros(d);
        for c in 0..4 * n {
            u = DVector::from_fn(d, |k, _| if k == c { 1.0 } else { 0.0 });
            for b in &cols {
                let p = ip(&u, b);
                u -= b * p;
            }
            if ip(&u, &u) > 1e-6 {
                break;
            }
        }
        let nu = ip(&u, &u).sqrt();
        u /= nu;
        let ju = j * &u;
        let ku = &split.k * &u;
        let jku = j * &ku;
        cols.extend([u, ju, ku, jku]);
    }
    let mut x = DVector::from_fn(d, |k, _| if k == 4 * n { 1.0 } else { 0.0 });
    let nx = ip(&x, &x).sqrt();
    x /= nx;
    let frame_c = |cols: &[DVector<f64>], k: usize| -> DVector<C64> {
        (cols[2 * k].map(|v| C64::new(v, 0.0)) - cols[2 * k + 1].map(|v| C64::new(0.0, v))) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    };
    let mut full = cols.clone();
    full.extend([x.clone(), j * &x]);
    let tc = ta.to_complex();
    let lam = tc.contract_vectors(&[frame_c(&full, 0), frame_c(&full, 1), frame_c(&full, 2 * n).map(|z| z.conj())]);
    let th = lam.arg();
    let xr = &x * th.cos() + (j * &x) * th.sin();
    full[4 * n] = xr.clone();
    full[4 * n + 1] = j * &xr;
    (DMatrix::from_columns(&full), lam)
}

/// Ĵ: J on ℋ, −J on 𝒱.
pub fn structure_swap(split: &SplitHermitianStructure) -> Result<SplitHermitianStructure> {
    let jh = split.j_h();
    let jv = split.j_v();
    let mut out = split.clone();
    out.j = ComplexStructureData::new(jh - jv)?;
    Ok(out)
}

/// Smallest singular value of X ↦ Tᵃ(X,·,·) over a g-orthonormal frame.
pub fn torsion_nondegeneracy(ta: &RTensor, g: &MetricData) -> f64 {
    let d = ta.dim();
    let e = g.orthonormal_frame();
    let te = ta.pull_all(&e);
    let m = DMatrix::from_fn(d * d, d, |r, x| te.at(&[x, r / d, r % d]));
    m.svd(false, false).singular_values.min()
}
