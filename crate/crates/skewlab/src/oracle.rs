//! Finite-difference backend on explicit charts, independent of the
//! homogeneous machinery: Christoffel symbols, curvature, dΩ and the
//! Nijenhuis tensor by central differences, plus frame-independent
//! invariants for comparing with the origin-coset computations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::multilinear::{tensor_norm_sq, MetricData, RTensor};

pub type MatrixField = Box<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Default oracle comparison tolerance.
pub const ORACLE_TOL: f64 = 1e-4;

pub struct ChartMetric {
    pub name: String,
    pub dim: usize,
    eval: MatrixField,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl std::fmt::Debug for ChartMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartMetric").field("name", &self.name).field("dim", &self.dim).finish()
    }
}

impl ChartMetric {
    pub fn new(name: impl Into<String>, dim: usize, lo: Vec<f64>, hi: Vec<f64>, eval: MatrixField) -> Self {
        Self { name: name.into(), dim, eval, lo, hi }
    }

    pub fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        (self.eval)(x)
    }

    fn check_interior(&self, x: &[f64], margin: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Shape(format!("{}: point has {} coordinates, expected {}", self.name, x.len(), self.dim)));
        }
        let inside = x.iter().zip(&self.lo).zip(&self.hi).all(|((&v, &l), &h)| v - margin >= l && v + margin <= h);
        if inside {
            Ok(())
        } else {
            Err(Error::Domain(x.to_vec()))
        }
    }
}

fn shifted(x: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[i] += h;
    y
}

/// Central difference of a matrix field along coordinate `i`.
fn partial(f: &dyn Fn(&[f64]) -> DMatrix<f64>, x: &[f64], i: usize, h: f64) -> DMatrix<f64> {
    (f(&shifted(x, i, h)) - f(&shifted(x, i, -h))) / (2.0 * h)
}

fn christoffel_at(chart: &ChartMetric, x: &[f64], h: f64) -> RTensor {
    let d = chart.dim;
    let g = chart.metric(x);
    let gi = g.clone().try_inverse().expect("chart metric invertible");
    let dg: Vec<DMatrix<f64>> = (0..d).map(|k| partial(&|y| chart.metric(y), x, k, h)).collect();
    RTensor::from_fn(d, (1, 2), |ix| {
        let (l, i, j) = (ix[0], ix[1], ix[2]);
        0.5 * (0..d).map(|m| gi[(l, m)] * (dg[i][(m, j)] + dg[j][(m, i)] - dg[m][(i, j)])).sum::<f64>()
    })
}

/// Γ^l_{ij} as a (1,2) tensor [l, i, j].
pub fn fd_christoffel(chart: &ChartMetric, x: &[f64], step: f64) -> Result<RTensor> {
    chart.check_interior(x, 2.0 * step)?;
    Ok(christoffel_at(chart, x, step))
}

/// R(∂i,∂j,∂k,∂w) = g(R(∂i,∂j)∂k, ∂w) with
/// R(∂i,∂j)∂k = (∂_iΓ^l_jk − ∂_jΓ^l_ik + Γ^m_jkΓ^l_im − Γ^m_ikΓ^l_jm)∂_l.
pub fn fd_curvature(chart: &ChartMetric, x: &[f64], step: f64) -> Result<RTensor> {
    chart.check_interior(x, 2.0 * step)?;
    let d = chart.dim;
    let gam = christoffel_at(chart, x, step);
    let dgam: Vec<RTensor> = (0..d)
        .map(|i| {
            let p = christoffel_at(chart, &shifted(x, i, step), step);
            let m = christoffel_at(chart, &shifted(x, i, -step), step);
            p.sub(&m).scale(1.0 / (2.0 * step))
        })
        .collect();
    let g = chart.metric(x);
    let mut rv = vec![0.0; d * d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let mut v = dgam[i].at(&[l, j, k]) - dgam[j].at(&[l, i, k]);
                    for m in 0..d {
                        v += gam.at(&[m, j, k]) * gam.at(&[l, i, m]) - gam.at(&[m, i, k]) * gam.at(&[l, j, m]);
                    }
                    rv[((i * d + j) * d + k) * d + l] = v;
                }
            }
        }
    }
    Ok(RTensor::from_fn(d, (0, 4), |ix| {
        let (i, j, k, w) = (ix[0], ix[1], ix[2], ix[3]);
        (0..d).map(|l| rv[((i * d + j) * d + k) * d + l] * g[(l, w)]).sum()
    }))
}

/// dΩ(∂a,∂b,∂c) = ∂_aΩ_bc − ∂_bΩ_ac + ∂_cΩ_ab for Ω = g(J·,·).
pub fn fd_d_omega(chart: &ChartMetric, j: &dyn Fn(&[f64]) -> DMatrix<f64>, x: &[f64], step: f64) -> Result<RTensor> {
    chart.check_interior(x, step)?;
    let d = chart.dim;
    let omega = |y: &[f64]| j(y).transpose() * chart.metric(y);
    let dom: Vec<DMatrix<f64>> = (0..d).map(|k| partial(&omega, x, k, step)).collect();
    Ok(RTensor::from_fn(d, (0, 3), |i| {
        let (a, b, c) = (i[0], i[1], i[2]);
        dom[a][(b, c)] - dom[b][(a, c)] + dom[c][(a, b)]
    }))
}

/// N(∂i,∂j) = [J∂i,J∂j] − J[J∂i,∂j] − J[∂i,J∂j], lowered with g.
pub fn fd_nijenhuis(chart: &ChartMetric, j: &dyn Fn(&[f64]) -> DMatrix<f64>, x: &[f64], step: f64) -> Result<RTensor> {
    chart.check_interior(x, step)?;
    let d = chart.dim;
    let jm = j(x);
    let dj: Vec<DMatrix<f64>> = (0..d).map(|k| partial(j, x, k, step)).collect();
    let g = chart.metric(x);
    let mut vals = Vec::with_capacity(d * d);
    for i in 0..d {
        for k in 0..d {
            let nv = DVector::from_fn(d, |b, _| {
                let mut v = 0.0;
                for a in 0..d {
                    v += jm[(a, i)] * dj[a][(b, k)] - jm[(a, k)] * dj[a][(b, i)];
                }
                for c in 0..d {
                    v += jm[(b, c)] * dj[k][(c, i)] - jm[(b, c)] * dj[i][(c, k)];
                }
                v
            });
            vals.push(&g * nv);
        }
    }
    Ok(RTensor::from_fn(d, (0, 3), |ix| vals[ix[0] * d + ix[1]][ix[2]]))
}

pub fn euclidean(dim: usize) -> ChartMetric {
    ChartMetric::new("euclidean", dim, vec![-10.0; dim], vec![10.0; dim], Box::new(move |_| DMatrix::identity(dim, dim)))
}

/// Unit round S⁴ in stereographic coordinates, g = 4/(1+|x|²)² δ.
pub fn s4_stereographic() -> ChartMetric {
    ChartMetric::new(
        "S4 stereographic",
        4,
        vec![-2.0; 4],
        vec![2.0; 4],
        Box::new(|x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            DMatrix::identity(4, 4) * (4.0 / ((1.0 + r2) * (1.0 + r2)))
        }),
    )
}

/// Closed-form Christoffels of the stereographic chart: with g = e^{2f}δ,
/// Γ^k_ij = δ_ik ∂_j f + δ_jk ∂_i f − δ_ij ∂_k f, ∂_i f = −2x_i/(1+|x|²).
pub fn s4_christoffel_closed(x: &[f64]) -> RTensor {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let df: Vec<f64> = x.iter().map(|v| -2.0 * v / (1.0 + r2)).collect();
    let dl = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    RTensor::from_fn(4, (1, 2), |ix| {
        let (k, i, j) = (ix[0], ix[1], ix[2]);
        dl(i, k) * df[j] + dl(j, k) * df[i] - dl(i, j) * df[k]
    })
}

/// Constant-curvature tensor κ(g(Y,Z)g(X,W) − g(X,Z)g(Y,W)).
pub fn constant_curvature(g: &DMatrix<f64>, kappa: f64) -> RTensor {
    RTensor::from_fn(g.nrows(), (0, 4), |i| {
        let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
        kappa * (g[(y, z)] * g[(x, w)] - g[(x, z)] * g[(y, w)])
    })
}

fn complex_point(x: &[f64]) -> Vec<C64> {
    x.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
}

/// Fubini–Study metric on the affine chart of ℂP^m (holomorphic sectional
/// curvature 4), real coordinates interleaved (x₁,y₁,…).
pub fn fs_metric_at(x: &[f64]) -> DMatrix<f64> {
    let z = complex_point(x);
    let m = z.len();
    let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    let q = 1.0 + r2;
    let mut g = DMatrix::zeros(2 * m, 2 * m);
    for a in 0..m {
        for b in 0..m {
            let delta = if a == b { q } else { 0.0 };
            let h = (C64::new(delta, 0.0) - z[a].conj() * z[b]) / (q * q);
            g[(2 * a, 2 * b)] = h.re;
            g[(2 * a, 2 * b + 1)] = h.im;
            g[(2 * a + 1, 2 * b)] = -h.im;
            g[(2 * a + 1, 2 * b + 1)] = h.re;
        }
    }
    g
}

pub fn fubini_study(m: usize) -> ChartMetric {
    ChartMetric::new(format!("CP{m} Fubini-Study"), 2 * m, vec![-3.0; 2 * m], vec![3.0; 2 * m], Box::new(fs_metric_at))
}

/// Fibre plane of ℂP³ → S⁴ at an affine point, as real chart vectors
/// (w, iw) with w the chart velocity of [v + s·jv], v = (1, z),
/// j(a,b,c,d) = (−b̄, ā, −d̄, c̄).
fn cp3_fibre(x: &[f64]) -> DMatrix<f64> {
    let z = complex_point(x);
    let v = [C64::new(1.0, 0.0), z[0], z[1], z[2]];
    let jv = [-v[1].conj(), v[0].conj(), -v[3].conj(), v[2].conj()];
    let w: Vec<C64> = (1..4).map(|k| jv[k] - jv[0] * v[k]).collect();
    let mut m = DMatrix::zeros(6, 2);
    for (k, c) in w.iter().enumerate() {
        let ic = c * C64::new(0.0, 1.0);
        m[(2 * k, 0)] = c.re;
        m[(2 * k + 1, 0)] = c.im;
        m[(2 * k, 1)] = ic.re;
        m[(2 * k + 1, 1)] = ic.im;
    }
    m
}

/// Fubini–Study-orthogonal projector onto the fibre directions.
pub fn cp3_vertical_projector(x: &[f64]) -> DMatrix<f64> {
    let g = fs_metric_at(x);
    let w = cp3_fibre(x);
    let gram = w.transpose() * &g * &w;
    &w * gram.try_inverse().expect("fibre plane nondegenerate") * w.transpose() * g
}

/// Twistor metric h_t on ℂP³ over S⁴ of curvature 4: Fubini–Study on the
/// horizontal complement and (t/t₀)·Fubini–Study on the fibres, t₀ = 1/4.
pub fn cp3_twistor(t: f64) -> ChartMetric {
    let t0 = 0.25;
    ChartMetric::new(
        format!("CP3 twistor t={t}"),
        6,
        vec![-3.0; 6],
        vec![3.0; 6],
        Box::new(move |x| {
            let g = fs_metric_at(x);
            let pv = cp3_vertical_projector(x);
            let ph = DMatrix::identity(6, 6) - &pv;
            ph.transpose() * &g * &ph + pv.transpose() * &g * &pv * (t / t0)
        }),
    )
}

/// Standard complex structure of the affine chart (this is J₁ for every t).
pub fn chart_j1(x: &[f64]) -> DMatrix<f64> {
    crate::multilinear::standard_j(x.len() / 2)
}

/// J₂ = J on the horizontal complement, −J on the fibres.
pub fn chart_j2(x: &[f64]) -> DMatrix<f64> {
    let j = chart_j1(x);
    let pv = cp3_vertical_projector(x);
    let ph = DMatrix::identity(6, 6) - &pv;
    &j * (ph - pv)
}

/// Frame-independent curvature data at a point.
#[derive(Clone, Debug)]
pub struct CurvatureInvariants {
    /// Sorted eigenvalues of g⁻¹Ric.
    pub ricci: Vec<f64>,
    pub scalar: f64,
    /// Sorted eigenvalues of the curvature operator on Λ², in an
    /// orthonormal frame.
    pub operator: Vec<f64>,
}

impl CurvatureInvariants {
    /// Largest entrywise difference, each scaled by max(1, |reference|).
    pub fn max_diff(&self, other: &Self) -> f64 {
        if self.ricci.len() != other.ricci.len() || self.operator.len() != other.operator.len() {
            return f64::INFINITY;
        }
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        let mut worst = rel(self.scalar, other.scalar);
        for (a, b) in self.ricci.iter().zip(&other.ricci).chain(self.operator.iter().zip(&other.operator)) {
            worst = worst.max(rel(*a, *b));
        }
        worst
    }
}

pub fn curvature_invariants(r: &RTensor, g: &DMatrix<f64>) -> Result<CurvatureInvariants> {
    let metric = MetricData::new(g.clone())?;
    let d = r.dim();
    let e = metric.orthonormal_frame();
    let rn = r.pull_all(&e);
    let (ric, s) = crate::homog::ricci_scalar(r, &metric);
    let ric_n = e.transpose() * ric * &e;
    let mut ricci: Vec<f64> = ric_n.symmetrize_eigs();
    ricci.sort_by(f64::total_cmp);
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
    let op = DMatrix::from_fn(pairs.len(), pairs.len(), |a, b| {
        let (i, j) = pairs[a];
        let (k, l) = pairs[b];
        rn.at(&[i, j, l, k])
    });
    let mut operator: Vec<f64> = op.symmetrize_eigs();
    operator.sort_by(f64::total_cmp);
    Ok(CurvatureInvariants { ricci, scalar: s, operator })
}

trait SymEigs {
    fn symmetrize_eigs(&self) -> Vec<f64>;
}

impl SymEigs for DMatrix<f64> {
    fn symmetrize_eigs(&self) -> Vec<f64> {
        let s = (self + self.transpose()) * 0.5;
        s.symmetric_eigenvalues().iter().copied().collect()
    }
}

/// Tensorial |·|² of a covariant tensor with respect to the chart metric.
pub fn chart_norm_sq(t: &RTensor, g: &DMatrix<f64>) -> Result<f64> {
    tensor_norm_sq(t, &MetricData::new(g.clone())?)
}

/// Defects of the finite-difference curvature against a closed form at
/// steps h and h/2, and their ratio (≈ 4 for a second-order scheme).
pub fn richardson_ratio(
    chart: &ChartMetric,
    x: &[f64],
    h: f64,
    exact: &RTensor,
) -> Result<(f64, f64, f64)> {
    let e1 = fd_curvature(chart, x, h)?.max_abs_diff(exact);
    let e2 = fd_curvature(chart, x, h / 2.0)?.max_abs_diff(exact);
    Ok((e1, e2, e1 / e2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_points_are_rejected() {
        let c = s4_stereographic();
        assert!(matches!(fd_christoffel(&c, &[1.9995, 0.0, 0.0, 0.0], 1e-3), Err(Error::Domain(_))));
        assert!(fd_christoffel(&c, &[0.0; 3], 1e-3).is_err());
    }
}
