//! Reductive homogeneous spaces evaluated at the origin coset: structure
//! constants, the Nomizu map of invariant connections, curvature, Ricci
//! tensors and the model quaternionic Kähler bases S⁴, ℂP², ℍPⁿ.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::multilinear::{for_each_index, MetricData, RTensor};
use crate::repthy::sp_basis;

/// Lie algebra 𝔤 = 𝔥 ⊕ 𝔪 with an Ad(H)-invariant metric on 𝔪.
#[derive(Clone, Debug)]
pub struct HomogeneousSpace {
    pub name: String,
    ng: usize,
    /// [e_i, e_j] = Σ_k c[(i·ng + j)·ng + k] e_k over all of 𝔤.
    c: Vec<f64>,
    pub isotropy: Vec<usize>,
    pub complement: Vec<usize>,
    pub metric: MetricData,
    cm: Vec<DVector<f64>>,
    ch: Vec<DVector<f64>>,
    adh: Vec<DMatrix<f64>>,
}

/// Structure constants of the real span of anti-Hermitian matrices, with
/// respect to the inner product −Re tr(XY).
pub fn structure_constants(basis: &[DMatrix<C64>]) -> Vec<f64> {
    let n = basis.len();
    let inner = |x: &DMatrix<C64>, y: &DMatrix<C64>| -(x * y).trace().re;
    let gram = DMatrix::from_fn(n, n, |i, j| inner(&basis[i], &basis[j]));
    let gi = gram.try_inverse().expect("independent basis");
    let mut c = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            let br = linalg::commutator(&basis[i], &basis[j]);
            let v = DVector::from_fn(n, |k, _| inner(&br, &basis[k]));
            let coords = &gi * v;
            for k in 0..n {
                c[(i * n + j) * n + k] = coords[k];
            }
        }
    }
    c
}

/// Gram matrix −Re tr(XY) restricted to the given indices.
pub fn trace_gram(basis: &[DMatrix<C64>], idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| -(&basis[idx[a]] * &basis[idx[b]]).trace().re)
}

impl HomogeneousSpace {
    pub fn new(
        name: impl Into<String>,
        ng: usize,
        c: Vec<f64>,
        isotropy: Vec<usize>,
        complement: Vec<usize>,
        metric: MetricData,
    ) -> Result<Self> {
        if c.len() != ng * ng * ng {
            return Err(Error::Shape("structure constants length".into()));
        }
        if isotropy.len() + complement.len() != ng {
            return Err(Error::Shape("isotropy and complement must partition the algebra".into()));
        }
        if metric.dim() != complement.len() {
            return Err(Error::Shape("metric dimension differs from the complement".into()));
        }
        let mut s = Self {
            name: name.into(),
            ng,
            c,
            isotropy,
            complement,
            metric,
            cm: Vec::new(),
            ch: Vec::new(),
            adh: Vec::new(),
        };
        let dm = s.complement.len();
        for x in 0..dm {
            for y in 0..dm {
                let (gx, gy) = (s.complement[x], s.complement[y]);
                s.cm.push(DVector::from_fn(dm, |k, _| s.sc(gx, gy, s.complement[k])));
                s.ch.push(DVector::from_fn(s.isotropy.len(), |k, _| s.sc(gx, gy, s.isotropy[k])));
            }
        }
        for &h in &s.isotropy {
            s.adh.push(DMatrix::from_fn(dm, dm, |k, j| s.sc(h, s.complement[j], s.complement[k])));
        }
        let red = s.reductivity_residual();
        if red > 1e-10 {
            return Err(Error::Structural(format!("{}: [h,m] not in m (residual {red:e})", s.name)));
        }
        Ok(s)
    }

    /// Same Lie algebra, different reductive splitting and metric.
    pub fn with_splitting(
        &self,
        name: impl Into<String>,
        isotropy: Vec<usize>,
        complement: Vec<usize>,
        metric: MetricData,
    ) -> Result<Self> {
        Self::new(name, self.ng, self.c.clone(), isotropy, complement, metric)
    }

    /// c^k_{ij} in global indices.
    pub fn sc(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.ng + j) * self.ng + k]
    }

    pub fn lie_dim(&self) -> usize {
        self.ng
    }

    /// dim 𝔪.
    pub fn dim(&self) -> usize {
        self.complement.len()
    }

    pub fn g(&self) -> &DMatrix<f64> {
        self.metric.g()
    }

    /// [X,Y]_𝔪 of 𝔪-coordinate vectors.
    pub fn bracket_m(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        let mut out = DVector::zeros(d);
        for a in 0..d {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..d {
                if y[b] != 0.0 {
                    out += &self.cm[a * d + b] * (x[a] * y[b]);
                }
            }
        }
        out
    }

    /// [e_x, e_y]_𝔪 for basis indices of 𝔪.
    pub fn bracket_m_basis(&self, x: usize, y: usize) -> &DVector<f64> {
        &self.cm[x * self.dim() + y]
    }

    /// 𝔥-coordinates of [e_x, e_y].
    pub fn bracket_h_basis(&self, x: usize, y: usize) -> &DVector<f64> {
        &self.ch[x * self.dim() + y]
    }

    /// ad(h_i)|𝔪 for the i-th isotropy element.
    pub fn ad_h(&self, i: usize) -> &DMatrix<f64> {
        &self.adh[i]
    }

    /// ad of a complement basis element, projected back onto 𝔪.
    pub fn ad_m(&self, x: usize) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |k, y| self.cm[x * d + y][k])
    }

    pub fn jacobi_residual(&self) -> f64 {
        let n = self.ng;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for m in 0..n {
                            s += self.sc(j, k, m) * self.sc(i, m, l)
                                + self.sc(k, i, m) * self.sc(j, m, l)
                                + self.sc(i, j, m) * self.sc(k, m, l);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    pub fn reductivity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for &h in &self.isotropy {
            for &x in &self.complement {
                for &k in &self.isotropy {
                    worst = worst.max(self.sc(h, x, k).abs());
                }
            }
        }
        worst
    }

    /// Skewness of every ad(h)|𝔪 with respect to the metric.
    pub fn invariance_residual(&self) -> f64 {
        self.adh.iter().map(|a| self.metric.skew_residual(a)).fold(0.0, f64::max)
    }
}

/// Nomizu map Λ: 𝔪 → End(𝔪), stored as one matrix per basis vector
/// (column y of `maps[x]` is Λ(e_x)e_y).
#[derive(Clone, Debug)]
pub struct ConnectionMap {
    pub maps: Vec<DMatrix<f64>>,
}

impl ConnectionMap {
    pub fn zero(d: usize) -> Self {
        Self { maps: vec![DMatrix::zeros(d, d); d] }
    }

    pub fn dim(&self) -> usize {
        self.maps.len()
    }

    /// Λ(X) for an arbitrary vector X.
    pub fn apply(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim();
        self.maps.iter().zip(x.iter()).fold(DMatrix::zeros(d, d), |acc, (m, &c)| acc + m * c)
    }

    /// Valence-(1,2) tensor with components [k, x, y] = (Λ(e_x)e_y)_k.
    pub fn as_tensor(&self) -> RTensor {
        RTensor::from_fn(self.dim(), (1, 2), |i| self.maps[i[1]][(i[0], i[2])])
    }

    pub fn metric_residual(&self, g: &MetricData) -> f64 {
        self.maps.iter().map(|m| g.skew_residual(m)).fold(0.0, f64::max)
    }

    /// Λ + ½ T♯ for a covariant 3-tensor T: Λ'(X)Y = Λ(X)Y + ½ T(X,Y)♯.
    pub fn add_torsion(&self, t: &RTensor, g: &MetricData) -> Self {
        let d = self.dim();
        let gi = g.ginv();
        let maps = (0..d)
            .map(|x| {
                DMatrix::from_fn(d, d, |k, y| {
                    self.maps[x][(k, y)] + 0.5 * (0..d).map(|z| t.at(&[x, y, z]) * gi[(z, k)]).sum::<f64>()
                })
            })
            .collect();
        Self { maps }
    }

    pub fn difference(&self, other: &Self) -> f64 {
        self.maps.iter().zip(&other.maps).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max)
    }
}

/// Levi-Civita Nomizu map: Λ(X)Y = ½[X,Y]_𝔪 + U(X,Y) with
/// 2g(U(X,Y),Z) = g([Z,X]_𝔪,Y) + g(X,[Z,Y]_𝔪).
pub fn levi_civita(space: &HomogeneousSpace) -> ConnectionMap {
    let d = space.dim();
    let g = space.g();
    let gi = space.metric.ginv();
    let mut maps = vec![DMatrix::zeros(d, d); d];
    for x in 0..d {
        for y in 0..d {
            let rhs = DVector::from_fn(d, |z, _| {
                let zx = space.bracket_m_basis(z, x);
                let zy = space.bracket_m_basis(z, y);
                (0..d).map(|k| zx[k] * g[(k, y)] + g[(x, k)] * zy[k]).sum::<f64>()
            });
            let u = gi * rhs * 0.5;
            let col = space.bracket_m_basis(x, y) * 0.5 + u;
            maps[x].set_column(y, &col);
        }
    }
    ConnectionMap { maps }
}

/// Torsion as a valence-(1,2) tensor [k, x, y] = (Λ(X)Y − Λ(Y)X − [X,Y]_𝔪)_k.
pub fn torsion(space: &HomogeneousSpace, conn: &ConnectionMap) -> RTensor {
    RTensor::from_fn(space.dim(), (1, 2), |i| {
        let (k, x, y) = (i[0], i[1], i[2]);
        conn.maps[x][(k, y)] - conn.maps[y][(k, x)] - space.bracket_m_basis(x, y)[k]
    })
}

/// Torsion lowered: T(X,Y,Z) = g(T(X,Y),Z).
pub fn torsion_lowered(space: &HomogeneousSpace, conn: &ConnectionMap) -> RTensor {
    let t = torsion(space, conn);
    let d = space.dim();
    let g = space.g();
    RTensor::from_fn(d, (0, 3), |i| (0..d).map(|k| t.at(&[k, i[0], i[1]]) * g[(k, i[2])]).sum())
}

/// Curvature endomorphisms R(e_x,e_y) = [Λ(x),Λ(y)] − Λ([x,y]_𝔪) − ad([x,y]_𝔥),
/// indexed x·d + y.
pub fn curvature_endos(space: &HomogeneousSpace, conn: &ConnectionMap) -> Vec<DMatrix<f64>> {
    let d = space.dim();
    let mut out = Vec::with_capacity(d * d);
    for x in 0..d {
        for y in 0..d {
            let mut r = linalg::commutator(&conn.maps[x], &conn.maps[y]);
            r -= conn.apply(space.bracket_m_basis(x, y));
            for (i, &c) in space.bracket_h_basis(x, y).iter().enumerate() {
                if c != 0.0 {
                    r -= space.ad_h(i) * c;
                }
            }
            out.push(r);
        }
    }
    out
}

/// R(X,Y,Z,W) = g(R(X,Y)Z, W).
pub fn curvature(space: &HomogeneousSpace, conn: &ConnectionMap) -> RTensor {
    lower_curvature(&curvature_endos(space, conn), space.g())
}

pub fn lower_curvature(endos: &[DMatrix<f64>], g: &DMatrix<f64>) -> RTensor {
    let d = g.nrows();
    let lowered: Vec<DMatrix<f64>> = endos.iter().map(|r| r.transpose() * g).collect();
    RTensor::from_fn(d, (0, 4), |i| lowered[i[0] * d + i[1]][(i[2], i[3])])
}

/// (∇T)(X; …) = −Σ T(…, Λ(X)·, …) for an invariant covariant tensor; the
/// new slot comes first.
pub fn covariant_derivative_invariant(conn: &ConnectionMap, t: &RTensor) -> RTensor {
    let d = conn.dim();
    let parts: Vec<RTensor> = conn.maps.iter().map(|l| t.derivation(l)).collect();
    let inner = t.data().len();
    let mut data = Vec::with_capacity(d * inner);
    for p in &parts {
        data.extend_from_slice(p.data());
    }
    RTensor::from_vec(d, (0, t.rank() + 1), data).expect("consistent length")
}

/// ∇_{e_x} A = [Λ(e_x), A] for an invariant endomorphism field A.
pub fn covariant_derivative_endo(conn: &ConnectionMap, a: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    conn.maps.iter().map(|l| linalg::commutator(l, a)).collect()
}

/// Ric(Y,Z) = Σ R(e_i,Y,Z,e_i) (trace of slots one and four) and s = tr_g Ric.
pub fn ricci_scalar(r: &RTensor, g: &MetricData) -> (DMatrix<f64>, f64) {
    let d = r.dim();
    let gi = g.ginv();
    let ric = DMatrix::from_fn(d, d, |y, z| {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += r.at(&[i, y, z, j]) * gi[(i, j)];
            }
        }
        s
    });
    let s = (&ric * gi).trace();
    (ric, s)
}

/// dα for an invariant k-form: Σ_{i<j} (−1)^{i+j} α([X_i,X_j]_𝔪, X₀,…,X̂_i,…,X̂_j,…).
pub fn exterior_derivative(space: &HomogeneousSpace, alpha: &RTensor) -> RTensor {
    let d = space.dim();
    let k = alpha.rank();
    let mut args = vec![0usize; k];
    RTensor::from_fn(d, (0, k + 1), |x| {
        let mut total = 0.0;
        for i in 0..=k {
            for j in i + 1..=k {
                let rest: Vec<usize> = (0..=k).filter(|&l| l != i && l != j).map(|l| x[l]).collect();
                let br = space.bracket_m_basis(x[i], x[j]);
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                for (m, &c) in br.iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    args[0] = m;
                    args[1..].copy_from_slice(&rest);
                    total += sign * c * alpha.at(&args);
                }
            }
        }
        total
    })
}

/// Model quaternionic Kähler bases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseModel {
    S4,
    Cp2,
    Hpn,
}

impl BaseModel {
    pub fn name(&self) -> &'static str {
        match self {
            BaseModel::S4 => "s4",
            BaseModel::Cp2 => "cp2",
            BaseModel::Hpn => "hpn",
        }
    }
}

impl std::str::FromStr for BaseModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s4" => Ok(BaseModel::S4),
            "cp2" => Ok(BaseModel::Cp2),
            "hpn" | "hp" => Ok(BaseModel::Hpn),
            other => Err(Error::Parameter(format!("unknown base model {other:?}"))),
        }
    }
}

/// Local quaternionic frame I', J', K' on the base's 𝔪.
#[derive(Clone, Debug)]
pub struct QuatStructure {
    pub i: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub k: DMatrix<f64>,
}

impl QuatStructure {
    pub fn all(&self) -> [&DMatrix<f64>; 3] {
        [&self.i, &self.j, &self.k]
    }

    /// Worst residual over I²=J²=K²=−1, IJ=K, JK=I, KI=J and g-orthogonality.
    pub fn residual(&self, g: &MetricData) -> f64 {
        let d = self.i.nrows();
        let one = DMatrix::<f64>::identity(d, d);
        let mut worst: f64 = 0.0;
        for l in self.all() {
            worst = worst.max((l * l + &one).amax()).max(g.orthogonality_residual(l));
        }
        worst
            .max((&self.i * &self.j - &self.k).amax())
            .max((&self.j * &self.k - &self.i).amax())
            .max((&self.k * &self.i - &self.j).amax())
    }
}

/// A quaternionic Kähler base as a symmetric space.
#[derive(Clone, Debug)]
pub struct QuatBase {
    pub model: BaseModel,
    pub n: usize,
    pub scale: f64,
    pub space: HomogeneousSpace,
    pub quat: QuatStructure,
    /// Global 𝔤-indices of q₁, q₂, q₃ with [q₁,q₂] = 2q₃ cyclically; ad(q_a)|𝔪 = I', J', K'.
    pub triple: [usize; 3],
}

fn su3_basis() -> Vec<DMatrix<C64>> {
    let e = |a: usize, b: usize| {
        let mut m = DMatrix::<C64>::zeros(3, 3);
        m[(a, b)] = C64::new(1.0, 0.0);
        m
    };
    let i = C64::new(0.0, 1.0);
    let p = vec![
        e(0, 2) - e(2, 0),
        (e(0, 2) + e(2, 0)) * i,
        e(1, 2) - e(2, 1),
        (e(1, 2) + e(2, 1)) * i,
    ];
    let q1 = (e(0, 0) - e(1, 1)) * i;
    let q2 = e(0, 1) - e(1, 0);
    let q3 = (e(0, 1) + e(1, 0)) * i;
    let c = (e(0, 0) + e(1, 1) - e(2, 2) * C64::new(2.0, 0.0)) * (i / 3f64.sqrt());
    let mut b = p;
    b.extend([q1, q2, q3, c]);
    b
}

/// Builds S⁴ = Sp(2)/(Sp(1)×Sp(1)), ℂP² = SU(3)/S(U(2)×U(1)) or
/// ℍPⁿ = Sp(n+1)/(Sp(n)×Sp(1)). At scale 1: unit round S⁴; Fubini–Study ℂP²
/// of holomorphic sectional curvature 4; ℍPⁿ with R' = R_{ℍPⁿ}.
pub fn build_base(model: BaseModel, n: usize, scale: f64) -> Result<QuatBase> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Parameter(format!("scale must be positive, got {scale}")));
    }
    match model {
        BaseModel::S4 | BaseModel::Cp2 if n != 1 => {
            return Err(Error::Parameter(format!("{} requires n = 1, got {n}", model.name())))
        }
        BaseModel::Hpn if n < 1 => return Err(Error::Parameter("hpn requires n >= 1".into())),
        _ => {}
    }
    let (basis, isotropy, complement, triple, c0) = match model {
        BaseModel::S4 | BaseModel::Hpn => {
            let k = n + 1;
            let b = sp_basis(k);
            let mut iso = Vec::new();
            let mut comp = Vec::new();
            for (idx, m) in b.iter().enumerate() {
                let off = m.view((2 * n, 0), (2, 2 * n)).iter().any(|z| z.norm() > 0.0);
                if off {
                    comp.push(idx);
                } else {
                    iso.push(idx);
                }
            }
            let triple = [3 * n, 3 * n + 1, 3 * n + 2];
            let c0 = if model == BaseModel::S4 { 1.0 } else { 0.25 };
            (b, iso, comp, triple, c0)
        }
        BaseModel::Cp2 => (su3_basis(), vec![4, 5, 6, 7], vec![0, 1, 2, 3], [4, 5, 6], 0.5),
    };
    let c = structure_constants(&basis);
    let metric = MetricData::new(trace_gram(&basis, &complement) * (scale * c0))?;
    let name = match model {
        BaseModel::S4 => "S4".to_string(),
        BaseModel::Cp2 => "CP2".to_string(),
        BaseModel::Hpn => format!("HP{n}"),
    };
    let space = HomogeneousSpace::new(name, basis.len(), c, isotropy, complement, metric)?;
    let ad = |q: usize| {
        let pos = space.isotropy.iter().position(|&h| h == q).expect("triple lies in the isotropy");
        space.ad_h(pos).clone()
    };
    let quat = QuatStructure { i: ad(triple[0]), j: ad(triple[1]), k: ad(triple[2]) };
    let r = quat.residual(&space.metric);
    if r > 1e-10 {
        return Err(Error::Structural(format!("quaternionic identities fail (residual {r:e})")));
    }
    Ok(QuatBase { model, n, scale, space, quat, triple })
}

impl QuatBase {
    pub fn levi_civita(&self) -> ConnectionMap {
        levi_civita(&self.space)
    }

    pub fn curvature(&self) -> RTensor {
        curvature(&self.space, &self.levi_civita())
    }

    pub fn scalar_curvature(&self) -> f64 {
        ricci_scalar(&self.curvature(), &self.space.metric).1
    }

    /// R' − s'/(16n(n+2)) R_{ℍPⁿ}.
    pub fn hyper_part(&self) -> RTensor {
        let r = self.curvature();
        let s = ricci_scalar(&r, &self.space.metric).1;
        let n = self.n as f64;
        let model = r_hpn(self.space.g(), &self.quat.all());
        r.sub(&model.scale(s / (16.0 * n * (n + 2.0))))
    }
}

/// The ℍPⁿ model tensor
/// g(Y,Z)g(X,W) − g(X,Z)g(Y,W) + Σ_L (g(LY,Z)g(LX,W) − g(LX,Z)g(LY,W) − 2g(LX,Y)g(LZ,W)).
pub fn r_hpn(g: &DMatrix<f64>, quat: &[&DMatrix<f64>]) -> RTensor {
    let d = g.nrows();
    let forms: Vec<DMatrix<f64>> = quat.iter().map(|l| l.transpose() * g).collect();
    RTensor::from_fn(d, (0, 4), |i| {
        let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
        let mut v = g[(y, z)] * g[(x, w)] - g[(x, z)] * g[(y, w)];
        for f in &forms {
            v += f[(y, z)] * f[(x, w)] - f[(x, z)] * f[(y, w)] - 2.0 * f[(x, y)] * f[(z, w)];
        }
        v
    })
}

/// Sectional curvature R(X,Y,Y,X)/(|X|²|Y|² − g(X,Y)²).
pub fn sectional_curvature(r: &RTensor, g: &MetricData, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let mut num = 0.0;
    let d = r.dim();
    for_each_index(d, 4, |i| {
        let c = x[i[0]] * y[i[1]] * y[i[2]] * x[i[3]];
        if c != 0.0 {
            num += r.at(i) * c;
        }
    });
    let gx = g.inner(x, x);
    let gy = g.inner(y, y);
    let gxy = g.inner(x, y);
    num / (gx * gy - gxy * gxy)
}
