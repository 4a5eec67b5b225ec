//! Twistor spaces of the model bases as homogeneous spaces: the metric
//! family h_t, the structures J₁ and J₂, the splitting ℋ ⊕ 𝒱 with K, I, ω, α,
//! the closed-form torsion, and the submersion calculus over the base.
//!
//! Horizontal directions come first (the base's 𝔪, 4n of them), followed by
//! the two vertical directions q₁, q₃.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::homog::{ConnectionMap, HomogeneousSpace, QuatBase};
use crate::linalg::{self, C64};
use crate::multilinear::{torsion_square, wedge, CTensor, ComplexStructureData, MetricData, RTensor};
use crate::repthy::act;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Structure {
    J1,
    J2,
}

impl Structure {
    pub fn name(&self) -> &'static str {
        match self {
            Structure::J1 => "J1",
            Structure::J2 => "J2",
        }
    }
}

impl std::str::FromStr for Structure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "J1" => Ok(Structure::J1),
            "J2" => Ok(Structure::J2),
            other => Err(Error::Parameter(format!("unknown structure {other:?}"))),
        }
    }
}

/// A value with a label, used for the residual lists of the lemma checks.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedResidual {
    pub name: &'static str,
    pub value: f64,
}

/// Pointwise model of §1 on the twistor space.
#[derive(Clone, Debug)]
pub struct SplitHermitianStructure {
    pub g: MetricData,
    pub j: ComplexStructureData,
    pub h_proj: DMatrix<f64>,
    pub v_proj: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub i: DMatrix<f64>,
    /// ω(X,Y) = ½ g((K+iI)X, Y).
    pub omega: CTensor,
    /// α(X) = g(X, Ū).
    pub alpha: CTensor,
    /// Unit vertical vector of type (1,0) for J₁.
    pub u: DVector<C64>,
    pub t: f64,
    pub lambda: C64,
    pub n: usize,
}

impl SplitHermitianStructure {
    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn hdim(&self) -> usize {
        4 * self.n
    }

    pub fn j_h(&self) -> DMatrix<f64> {
        self.j.j() * &self.h_proj
    }

    pub fn j_v(&self) -> DMatrix<f64> {
        self.j.j() * &self.v_proj
    }

    pub fn g_h(&self) -> DMatrix<f64> {
        self.h_proj.transpose() * self.g.g() * &self.h_proj
    }

    pub fn g_v(&self) -> DMatrix<f64> {
        self.v_proj.transpose() * self.g.g() * &self.v_proj
    }

    /// Worst residual over the defining identities: projectors, J-invariance
    /// and orthogonality of the splitting, the quaternionic relations on ℋ,
    /// and g((K+iI)X,Y) = 2ω(X,Y).
    pub fn invariant_residual(&self) -> f64 {
        let d = self.dim();
        let one = DMatrix::<f64>::identity(d, d);
        let (h, v) = (&self.h_proj, &self.v_proj);
        let j = self.j.j();
        let jh = self.j_h();
        let g = self.g.g();
        let mut worst: f64 = (h + v - &one).amax();
        worst = worst.max((h * h - h).amax()).max((v * v - v).amax());
        worst = worst.max((h.transpose() * g * v).amax());
        worst = worst.max((j * h - h * j).amax());
        worst = worst.max(self.j.compatible_with(&self.g));
        for l in [&self.k, &self.i] {
            worst = worst.max((l * v).amax()).max((v * l).amax());
            worst = worst.max((l * l + h).amax());
            worst = worst.max((l.transpose() * g * l - self.g_h()).amax());
        }
        worst = worst.max((&jh * &jh + h).amax());
        // I J = K on ℋ, and pairwise anticommutation
        worst = worst.max((&self.i * &jh - &self.k).amax());
        worst = worst.max((&self.i * &jh + &jh * &self.i).amax());
        worst = worst.max((&self.k * &jh + &jh * &self.k).amax());
        worst = worst.max((&self.i * &self.k + &self.k * &self.i).amax());
        let kpi = linalg::complexify(&self.k) + self.i.map(|x| C64::new(0.0, x));
        let lhs = kpi.transpose() * linalg::complexify(g);
        let two_omega = self.omega.to_matrix() * C64::new(2.0, 0.0);
        worst.max((lhs - two_omega).camax())
    }
}

/// Total space, base and the identification of ℋ with the base's 𝔪.
#[derive(Clone, Debug)]
pub struct SubmersionData {
    pub total: HomogeneousSpace,
    pub base: QuatBase,
    /// Columns embed the base's 𝔪 into the total 𝔪 (the horizontal lift).
    pub linkage: DMatrix<f64>,
    /// Global Lie-algebra indices of the vertical generators (q₁, q₃).
    pub vertical: [usize; 2],
}

impl SubmersionData {
    pub fn hdim(&self) -> usize {
        self.linkage.ncols()
    }

    /// Deviation of the linkage from an isometry onto (ℋ, g|ℋ).
    pub fn linkage_residual(&self) -> f64 {
        (self.linkage.transpose() * self.total.g() * &self.linkage - self.base.space.g()).amax()
    }
}

#[derive(Clone, Debug)]
pub struct Twistor {
    pub sub: SubmersionData,
    pub split: SplitHermitianStructure,
    pub structure: Structure,
    /// Scalar curvature of the base, computed from its curvature tensor.
    pub s_prime: f64,
}

/// t₀ = 4(n+2)/s' (Kähler) and t₁ = 2(n+2)/s' (nearly Kähler / parallel torsion).
pub fn t0_t1(s_prime: f64, n: usize) -> (f64, f64) {
    let n = n as f64;
    (4.0 * (n + 2.0) / s_prime, 2.0 * (n + 2.0) / s_prime)
}

/// (2 − s't/(2(n+2)))/√(2nt).
pub fn torsion_coefficient(s_prime: f64, n: usize, t: f64) -> f64 {
    let nf = n as f64;
    (2.0 - s_prime * t / (2.0 * (nf + 2.0))) / (2.0 * nf * t).sqrt()
}

/// |T^{a,t}|² = (6/t)(2 − s't/(2(n+2)))².
pub fn torsion_norm_sq_closed(s_prime: f64, n: usize, t: f64) -> f64 {
    let nf = n as f64;
    let c = 2.0 - s_prime * t / (2.0 * (nf + 2.0));
    6.0 / t * c * c
}

/// Coordinates of [q, q₂] in (q₁, q₂, q₃): the tangent vector to the fibre
/// sphere at z = J' in the (I', J', K') frame.
fn fibre_coords(space: &HomogeneousSpace, triple: [usize; 3], q: usize) -> DVector<f64> {
    DVector::from_fn(3, |a, _| space.sc(q, triple[1], triple[a]))
}

pub fn build_twistor(base: &QuatBase, t: f64, structure: Structure) -> Result<Twistor> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Parameter(format!("t must be positive, got {t}")));
    }
    let n = base.n;
    let hd = 4 * n;
    let d = hd + 2;
    let [q1, _, q3] = base.triple;
    let bs = &base.space;
    let isotropy: Vec<usize> = bs.isotropy.iter().copied().filter(|&h| h != q1 && h != q3).collect();
    let mut complement = bs.complement.clone();
    complement.extend([q1, q3]);

    let phi = DMatrix::from_columns(&[fibre_coords(bs, base.triple, q1), fibre_coords(bs, base.triple, q3)]);
    let mut g = DMatrix::zeros(d, d);
    g.view_mut((0, 0), (hd, hd)).copy_from(bs.g());
    let gv = phi.transpose() * &phi * (n as f64 * t);
    g.view_mut((hd, hd), (2, 2)).copy_from(&gv);
    let metric = MetricData::new(g)?;

    let name = format!("Z({})", bs.name);
    let total = bs.with_splitting(name, isotropy, complement, metric.clone())?;
    let inv = total.invariance_residual();
    if inv > 1e-10 {
        return Err(Error::Structural(format!("h_t is not isotropy invariant (residual {inv:e})")));
    }

    // J₁ on 𝒱: v ↦ p × v with p = (0,1,0) the base point J'.
    let p = nalgebra::Vector3::new(0.0, 1.0, 0.0);
    let cross = DMatrix::from_columns(
        &(0..2)
            .map(|c| {
                let v = nalgebra::Vector3::new(phi[(0, c)], phi[(1, c)], phi[(2, c)]);
                let w = p.cross(&v);
                DVector::from_column_slice(w.as_slice())
            })
            .collect::<Vec<_>>(),
    );
    let pinv = (phi.transpose() * &phi).try_inverse().ok_or_else(|| Error::Structural("degenerate fibre".into()))?
        * phi.transpose();
    let jv1 = &pinv * cross;
    let jv = match structure {
        Structure::J1 => jv1,
        Structure::J2 => -jv1,
    };
    let lift = |m: &DMatrix<f64>| {
        let mut out = DMatrix::zeros(d, d);
        out.view_mut((0, 0), (hd, hd)).copy_from(m);
        out
    };
    let mut jm = lift(&base.quat.j);
    jm.view_mut((hd, hd), (2, 2)).copy_from(&jv);
    let j = ComplexStructureData::new(jm)?;

    let mut h_proj = DMatrix::zeros(d, d);
    h_proj.view_mut((0, 0), (hd, hd)).fill_with_identity();
    let v_proj = DMatrix::<f64>::identity(d, d) - &h_proj;
    let k = lift(&base.quat.k);
    let i = lift(&base.quat.i);

    let gc = linalg::complexify(metric.g());
    let kpi = linalg::complexify(&k) + i.map(|x| C64::new(0.0, x));
    let omega = CTensor::from_matrix(&((kpi.transpose() * &gc) * C64::new(0.5, 0.0)));

    // U has fibre coordinates (1,0,0) + i(0,0,1), i.e. it corresponds to I' + iK'.
    let ci = &pinv * DVector::from_column_slice(&[1.0, 0.0, 0.0]);
    let ck = &pinv * DVector::from_column_slice(&[0.0, 0.0, 1.0]);
    let mut u = DVector::<C64>::zeros(d);
    for a in 0..2 {
        u[hd + a] = C64::new(ci[a], ck[a]);
    }
    let un = (u.adjoint() * &gc * &u)[(0, 0)].re.sqrt();
    u /= C64::new(un, 0.0);
    let alpha = CTensor::from_vector(&(&gc * u.map(|z| z.conj())));

    let s_prime = base.scalar_curvature();
    let lambda = C64::new(torsion_coefficient(s_prime, n, t), 0.0);
    let mut linkage = DMatrix::zeros(d, hd);
    linkage.view_mut((0, 0), (hd, hd)).fill_with_identity();

    let split = SplitHermitianStructure { g: metric, j, h_proj, v_proj, k, i, omega, alpha, u, t, lambda, n };
    let r = split.invariant_residual();
    if r > 1e-10 {
        return Err(Error::Structural(format!("split Hermitian structure invalid (residual {r:e})")));
    }
    Ok(Twistor { sub: SubmersionData { total, base: base.clone(), linkage, vertical: [q1, q3] }, split, structure, s_prime })
}

impl Twistor {
    pub fn dim(&self) -> usize {
        self.split.dim()
    }

    pub fn n(&self) -> usize {
        self.split.n
    }

    pub fn t(&self) -> f64 {
        self.split.t
    }

    pub fn t0_t1(&self) -> (f64, f64) {
        t0_t1(self.s_prime, self.split.n)
    }
}

/// Closed-form torsion c(t)(ω∧ᾱ + ω̄∧α), with its largest imaginary part.
pub fn torsion_formula(s: &SplitHermitianStructure, s_prime: f64, n: usize) -> Result<(RTensor, f64)> {
    let c = torsion_coefficient(s_prime, n, s.t);
    let a = wedge(&s.omega, &s.alpha.conj())?;
    let b = wedge(&s.omega.conj(), &s.alpha)?;
    let tt = a.add(&b).scale(C64::new(c, 0.0));
    Ok((tt.re(), tt.imag_max()))
}

/// O'Neill's A on horizontal pairs, A_X Y = v∇_X Y, as a (1,2) tensor
/// [k, x, y]; zero whenever x or y is vertical.
pub fn oneill_a(sub: &SubmersionData, lc: &ConnectionMap) -> RTensor {
    let hd = sub.hdim();
    let d = lc.dim();
    RTensor::from_fn(d, (1, 2), |i| {
        let (k, x, y) = (i[0], i[1], i[2]);
        if k >= hd && x < hd && y < hd {
            lc.maps[x][(k, y)]
        } else {
            0.0
        }
    })
}

/// Base curvature from O'Neill's formula
/// R' = R + g(A_Y Z, A_X W) − g(A_X Z, A_Y W) − 2 g(A_X Y, A_Z W).
pub fn oneill_curvature(sub: &SubmersionData, r: &RTensor, a: &RTensor) -> RTensor {
    let hd = sub.hdim();
    let d = r.dim();
    let g = sub.total.g();
    let aa = |p: usize, q: usize, s: usize, u: usize| -> f64 {
        let mut acc = 0.0;
        for k in hd..d {
            for l in hd..d {
                acc += a.at(&[k, p, q]) * g[(k, l)] * a.at(&[l, s, u]);
            }
        }
        acc
    };
    let lift = &sub.linkage;
    let rh = restrict(r, lift);
    RTensor::from_fn(hd, (0, 4), |i| {
        let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
        rh.at(i) + aa(y, z, x, w) - aa(x, z, y, w) - 2.0 * aa(x, y, z, w)
    })
}

/// Covariant tensor on the total space evaluated on horizontal lifts.
fn restrict(t: &RTensor, lift: &DMatrix<f64>) -> RTensor {
    let hd = lift.ncols();
    let d = lift.nrows();
    let mut cur = t.clone();
    for s in 0..t.rank() {
        cur = cur.pull_slot(s, &pad(lift, d));
    }
    let k = t.rank();
    RTensor::from_fn(hd, (0, k), |i| cur.at(i))
}

fn pad(lift: &DMatrix<f64>, d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    m.view_mut((0, 0), (d, lift.ncols())).copy_from(lift);
    m
}

/// R'(X,Y,Z,W) = Rᵃ(Xʰ,Yʰ,Zʰ,Wʰ) − g(Tᵃ(Xʰ,Yʰ), Tᵃ(Zʰ,Wʰ)).
pub fn project_curvature(sub: &SubmersionData, ra: &RTensor, ta: &RTensor) -> Result<RTensor> {
    let tt = torsion_square(ta, &sub.total.metric)?;
    Ok(restrict(&ra.sub(&tt), &sub.linkage))
}

/// Residuals of the splitting identities relating ∇ and ∇ᵃ for vertical
/// U, V and horizontal X, Y.
pub fn lemma1_checks(
    sub: &SubmersionData,
    lc: &ConnectionMap,
    la: &ConnectionMap,
    ta: &RTensor,
) -> Vec<NamedResidual> {
    let hd = sub.hdim();
    let d = lc.dim();
    let gi = sub.total.metric.ginv();
    // T(x,y)♯
    let tv = |x: usize, y: usize| DVector::from_fn(d, |k, _| (0..d).map(|z| ta.at(&[x, y, z]) * gi[(z, k)]).sum::<f64>());
    let hor = |v: &DVector<f64>| DVector::from_fn(d, |k, _| if k < hd { v[k] } else { 0.0 });
    let ver = |v: &DVector<f64>| DVector::from_fn(d, |k, _| if k >= hd { v[k] } else { 0.0 });
    let col = |c: &ConnectionMap, x: usize, y: usize| c.maps[x].column(y).into_owned();
    let (mut uv, mut uv_v, mut ux, mut ux_h, mut xu_h, mut xu_v, mut xy_h, mut xy_v) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for u in hd..d {
        for v in hd..d {
            uv = uv.max((col(lc, u, v) - col(la, u, v)).amax());
            uv_v = uv_v.max(hor(&col(lc, u, v)).amax());
        }
        for x in 0..hd {
            ux = ux.max((col(lc, u, x) - (col(la, u, x) - tv(u, x) * 0.5)).amax());
            ux_h = ux_h.max(ver(&col(lc, u, x)).amax());
            xu_h = xu_h.max((hor(&col(lc, x, u)) - hor(&tv(u, x)) * 0.5).amax());
            xu_v = xu_v.max((ver(&col(lc, x, u)) - col(la, x, u)).amax());
        }
    }
    for x in 0..hd {
        for y in 0..hd {
            xy_h = xy_h.max((hor(&col(lc, x, y)) - col(la, x, y)).amax());
            xy_v = xy_v.max((ver(&col(lc, x, y)) + ver(&tv(x, y)) * 0.5).amax());
        }
    }
    vec![
        NamedResidual { name: "nabla_U V = nabla^a_U V", value: uv },
        NamedResidual { name: "nabla_U V vertical", value: uv_v },
        NamedResidual { name: "nabla_U X = nabla^a_U X - T(U,X)/2", value: ux },
        NamedResidual { name: "nabla_U X horizontal", value: ux_h },
        NamedResidual { name: "h nabla_X U = T(U,X)/2", value: xu_h },
        NamedResidual { name: "v nabla_X U = nabla^a_X U", value: xu_v },
        NamedResidual { name: "h nabla_X Y = nabla^a_X Y", value: xy_h },
        NamedResidual { name: "v nabla_X Y = -T(X,Y)/2", value: xy_v },
    ]
}

/// Infinitesimal fibre action of the vertical generator `a` ∈ {0, 1} on ℋ:
/// X ↦ h[U, X], zero on 𝒱.
pub fn vertical_action(sub: &SubmersionData, a: usize) -> DMatrix<f64> {
    let total = &sub.total;
    let hd = sub.hdim();
    let d = total.dim();
    let q = sub.vertical[a];
    DMatrix::from_fn(d, d, |k, x| if k < hd && x < hd { total.sc(q, total.complement[x], total.complement[k]) } else { 0.0 })
}

/// Horizontal part hT: every slot restricted to and projected onto ℋ.
pub fn horizontal_part(t: &RTensor, h: &DMatrix<f64>) -> RTensor {
    let (r, _) = t.valence();
    let ht = h.transpose();
    let mut out = t.clone();
    for s in 0..t.rank() {
        out = out.pull_slot(s, if s < r { &ht } else { h });
    }
    out
}

/// h𝔏_U(hT) for the vertical generator `a`.
pub fn lie_derivative_horizontal(sub: &SubmersionData, h: &DMatrix<f64>, t: &RTensor, a: usize) -> RTensor {
    let x = vertical_action(sub, a);
    horizontal_part(&act(&x, &horizontal_part(t, h).to_complex()).re(), h)
}

/// Largest |h𝔏_U(hT)| over the vertical basis; T is projectable iff this vanishes.
pub fn projectability_check(t: &RTensor, sub: &SubmersionData, h: &DMatrix<f64>) -> f64 {
    (0..2).map(|a| lie_derivative_horizontal(sub, h, t, a).max_abs()).fold(0.0, f64::max)
}

/// The matrices A(U) with (h𝔏_U I, h𝔏_U J, h𝔏_U K) = (I, J, K)·A(U) for the
/// two vertical generators, and the residual of span preservation.
pub fn quaternionic_rotation(sub: &SubmersionData, split: &SplitHermitianStructure) -> (Vec<DMatrix<f64>>, f64) {
    let h = &split.h_proj;
    let frame = [split.i.clone(), split.j_h(), split.k.clone()];
    let basis = DMatrix::from_columns(&frame.iter().map(linalg::vec_of).collect::<Vec<_>>());
    let mut worst: f64 = 0.0;
    let mut out = Vec::new();
    for a in 0..2 {
        let mut m = DMatrix::zeros(3, 3);
        for (c, l) in frame.iter().enumerate() {
            let img = lie_derivative_horizontal(sub, h, &RTensor::from_endo(l), a).to_matrix();
            let (coef, res) = linalg::lstsq(&basis, &linalg::vec_of(&img));
            worst = worst.max(res);
            m.set_column(c, &coef);
        }
        out.push(m);
    }
    (out, worst)
}
