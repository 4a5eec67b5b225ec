//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any of them is red.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;

use nalgebra::{DMatrix, DVector};
use skewlab::connect::*;
use skewlab::homog::{build_base, covariant_derivative_invariant, levi_civita, sectional_curvature, BaseModel};
use skewlab::linalg::C64;
use skewlab::multilinear::{bianchi_b, pq_project, sigma_t, tensor_norm_sq, MetricData};
use skewlab::oracle;
use skewlab::repthy::*;
use skewlab::twistor::*;
use skewlab::RTensor;

/// Collects named comparisons for one criterion.
#[derive(Default)]
struct Tally {
    failures: Vec<String>,
    count: usize,
}

impl Tally {
    fn below(&mut self, what: &str, value: f64, tol: f64) {
        self.count += 1;
        if !(value < tol) {
            self.failures.push(format!("{what}: {value:e} not below {tol:e}"));
        }
    }

    fn above(&mut self, what: &str, value: f64, bound: f64) {
        self.count += 1;
        if !(value > bound) {
            self.failures.push(format!("{what}: {value:e} not above {bound:e}"));
        }
    }

    fn equal<T: PartialEq + std::fmt::Debug>(&mut self, what: &str, got: T, want: T) {
        self.count += 1;
        if got != want {
            self.failures.push(format!("{what}: got {got:?}, expected {want:?}"));
        }
    }
}

struct Setup {
    z: Twistor,
    pk: CanonicalTorsionPackage,
    r: RTensor,
    ra: RTensor,
}

fn setup(m: BaseModel, n: usize, factor_t1: f64, st: Structure) -> Setup {
    let b = build_base(m, n, 1.0).unwrap();
    let (_, t1) = t0_t1(b.scalar_curvature(), n);
    let z = build_twistor(&b, factor_t1 * t1, st).unwrap();
    let pk = canonical_connection(&z.sub.total, &z.split.j).unwrap();
    let r = curvature_of(&z.sub.total, &pk.lc);
    let ra = curvature_of(&z.sub.total, &pk.conn_a);
    Setup { z, pk, r, ra }
}

fn norm(t: &RTensor, g: &MetricData) -> f64 {
    tensor_norm_sq(t, g).unwrap().sqrt()
}

fn c1_norm_identity(t: &mut Tally) {
    for n in [1, 2] {
        for l in [C64::new(1.0, 0.0), C64::new(1.0, 1.0), C64::new(0.3, -2.0)] {
            let v = tensor_norm_sq(&torsion_family(n, l), &MetricData::identity(4 * n + 2)).unwrap();
            t.below(&format!("n={n} lambda={l}"), (v - 12.0 * n as f64 * l.norm_sqr()).abs(), 1e-10);
        }
    }
}

fn c2_fixed_spaces(t: &mut Tally) {
    for n in [1, 2] {
        let rho = build_rho(n, RhoVariant::Rho).unwrap();
        let cx = fixed_subspace(&induced_action(&rho, (0, 3), PqFilter::Complex(2, 1)).unwrap()).len();
        t.equal(&format!("n={n} complex (2,1)"), cx, 1);
        let re = fixed_subspace(&induced_action(&rho, (0, 3), PqFilter::RealPair(2, 1)).unwrap()).len();
        t.equal(&format!("n={n} real (2,1)+(1,2)"), re, 2);
    }
}

fn c3_stabilizer(t: &mut Tally) {
    for n in [1, 2] {
        let stab = stabilizer_algebra(&t0(n), &unitary_algebra(2 * n + 1)).unwrap();
        t.equal(&format!("n={n} dim"), stab.len(), n * (2 * n + 1) + 1);
        t.below(&format!("n={n} subspace distance"), stab.subspace_distance(&build_rho(n, RhoVariant::Rho).unwrap()), 1e-9);
    }
}

fn rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-9 * top).count()
}

/// Dimension of { R in S^2(rho) : b(R) in R.sigma }, built from scratch.
fn curvature_space_dim_independent(n: usize) -> usize {
    let alg = build_rho(n, RhoVariant::Rho).unwrap();
    let d = alg.dim;
    let idx = |x: usize, y: usize, z: usize, w: usize| ((x * d + y) * d + z) * d + w;
    // 2-forms F(x,y) = <A e_x, e_y>
    let forms: Vec<&DMatrix<f64>> = alg.basis.iter().collect();
    let mut sym: Vec<Vec<f64>> = Vec::new();
    for a in 0..forms.len() {
        for b in a..forms.len() {
            let mut r = vec![0.0; d.pow(4)];
            for x in 0..d {
                for y in 0..d {
                    for z in 0..d {
                        for w in 0..d {
                            let fa = |p: usize, q: usize| forms[a][(q, p)];
                            let fb = |p: usize, q: usize| forms[b][(q, p)];
                            r[idx(x, y, z, w)] = fa(x, y) * fb(z, w) + fb(x, y) * fa(z, w);
                        }
                    }
                }
            }
            sym.push(r);
        }
    }
    let cyclic = |r: &[f64]| -> DVector<f64> {
        DVector::from_fn(d.pow(4), |i, _| {
            let (x, y, z, w) = (i / (d * d * d), (i / (d * d)) % d, (i / d) % d, i % d);
            r[idx(x, y, z, w)] + r[idx(y, z, x, w)] + r[idx(z, x, y, w)]
        })
    };
    let sigma = sigma_t(&torsion_family(n, C64::new(1.0, 0.0)), &MetricData::identity(d)).unwrap();
    let cols: Vec<DVector<f64>> = sym.iter().map(|r| cyclic(r)).collect();
    let bmat = DMatrix::from_columns(&cols);
    let mut with_sigma = cols.clone();
    with_sigma.push(sigma.to_dvector());
    let aug = DMatrix::from_columns(&with_sigma);
    // independent symmetric products: S^2 has full dimension
    let s2 = DMatrix::from_columns(&sym.iter().map(|r| DVector::from_column_slice(r)).collect::<Vec<_>>());
    assert_eq!(rank(&s2), sym.len());
    // {c : B c in R sigma} has dimension (#cols + 1 - rank[B | sigma]) when sigma is hit, else ker B
    let kb = sym.len() - rank(&bmat);
    let hit = rank(&aug) == rank(&bmat);
    kb + usize::from(hit)
}

fn c4_curvature_space(t: &mut Tally) {
    for (n, want) in [(1, 11), (2, 71)] {
        let lib = curvature_space(n).unwrap().dim();
        let ind = curvature_space_dim_independent(n);
        t.equal(&format!("n={n} library vs independent"), lib, ind);
        t.equal(&format!("n={n} dimension"), ind, want);
    }
}

fn c5_torsion(t: &mut Tally) {
    for (m, n) in [(BaseModel::S4, 1), (BaseModel::Cp2, 1), (BaseModel::Hpn, 2)] {
        let b = build_base(m, n, 1.0).unwrap();
        let s = b.scalar_curvature();
        let (t0, t1) = t0_t1(s, n);
        for tv in [t1 / 2.0, t1, t0, 2.0 * t0] {
            let z = build_twistor(&b, tv, Structure::J1).unwrap();
            let pk = canonical_connection(&z.sub.total, &z.split.j).unwrap();
            let (tf, _) = torsion_formula(&z.split, s, n).unwrap();
            t.below(&format!("{m:?} t={tv} closed form"), tf.max_abs_diff(&pk.ta), 1e-9);
            let v = tensor_norm_sq(&pk.ta, &z.split.g).unwrap();
            t.below(&format!("{m:?} t={tv} norm"), (v - torsion_norm_sq_closed(s, n, tv)).abs(), 1e-9 * v.max(1.0));
            if tv == t0 {
                t.below(&format!("{m:?} vanishes at t0"), pk.ta.max_abs(), 1e-9);
            }
        }
    }
}

fn c6_parallel_torsion(t: &mut Tally) {
    for (m, n) in [(BaseModel::S4, 1), (BaseModel::Hpn, 2)] {
        for f in [1.0, 2.0, 0.7, 1.5] {
            let s = setup(m, n, f, Structure::J1);
            let nabla = covariant_derivative_invariant(&s.pk.conn_a, &s.pk.ta);
            let dn = nabla.frobenius_sq().sqrt();
            if f == 1.0 || f == 2.0 {
                t.below(&format!("{m:?} {f} t1"), dn, 1e-10);
            } else {
                t.above(&format!("{m:?} {f} t1"), dn, 1e-3 * norm(&s.pk.ta, &s.z.split.g));
            }
        }
    }
}

fn c7_identities(t: &mut Tally) {
    for (m, n) in [(BaseModel::S4, 1), (BaseModel::Cp2, 1), (BaseModel::Hpn, 2)] {
        let s = setup(m, n, 1.0, Structure::J1);
        let g = &s.z.split.g;
        t.below(&format!("{m:?} bianchi"), bianchi_b(&s.ra).unwrap().max_abs_diff(&sigma_t(&s.pk.ta, g).unwrap()), 1e-9);
        t.below(&format!("{m:?} torsion annihilation"), torsion_annihilation_residual(&s.ra, &s.pk.ta, g), 1e-9);
        t.below(&format!("{m:?} curvature relation"), curvature_relation_check(&s.r, &s.ra, &s.pk.ta, g).unwrap(), 1e-9);
        t.below(&format!("{m:?} pair symmetry"), s.ra.max_abs_diff(&s.ra.permuted(&[2, 3, 0, 1])), 1e-9);
    }
}

fn c8_ricci(t: &mut Tally) {
    for (m, n) in [(BaseModel::S4, 1), (BaseModel::Hpn, 1), (BaseModel::Hpn, 2)] {
        let s = setup(m, n, 1.0, Structure::J1);
        let rr = ricci_formulas_check(&s.r, &s.ra, &s.pk.ta, &s.z.split).unwrap();
        for (what, v) in [("Ric^a", rr.ric_a), ("s^a", rr.s_a), ("Ric", rr.ric), ("s", rr.s), ("Ric relation", rr.ric_relation), ("s relation", rr.s_relation)] {
            t.below(&format!("{m:?} n={n} {what}"), v, 1e-9);
        }
        if n == 1 {
            t.below(&format!("{m:?} Einstein"), rr.einstein, 1e-9);
        } else {
            t.above("n=2 not Einstein", rr.einstein, 1e-3);
            t.below("n=2 ratio 7:6", (rr.ric_h / rr.ric_v - 7.0 / 6.0).abs(), 1e-9);
        }
    }
}

fn c9_decomposition(t: &mut Tally) {
    for m in [BaseModel::S4, BaseModel::Cp2] {
        let s = setup(m, 1, 1.0, Structure::J1);
        let dec = decompose_curvature(&s.ra, &s.pk.ta, &s.z.split).unwrap();
        t.below(&format!("{m:?} vertical slots"), dec.vertical_residual(4), 1e-9);
        t.below(&format!("{m:?} commutes with I,J,K"), dec.quaternionic_residual(&s.z.split), 1e-9);
        if m == BaseModel::S4 {
            t.below("S4 hyper part", dec.r_hyper.max_abs(), 1e-9);
        }
    }
}

fn c10_holonomy(t: &mut Tally) {
    for (m, n, want) in [(BaseModel::S4, 1, 4), (BaseModel::Hpn, 2, 11)] {
        let s = setup(m, n, 1.0, Structure::J1);
        let hol = holonomy_algebra(&s.z.sub.total, &s.pk.conn_a).unwrap();
        t.equal(&format!("{m:?} dim"), hol.dim(), want);
        let frame = adapted_frame(&s.z.split, &s.pk.ta).0;
        let h = hol.as_lie_algebra().unwrap().conjugated(&frame).unwrap();
        t.below(&format!("{m:?} equals rho"), h.subspace_distance(&build_rho(n, RhoVariant::Rho).unwrap()), 1e-9);

        // u(1) generator as a multiple of the trace of the curvature endomorphisms
        let tr = u1_trace(&s.z.sub.total, &s.pk.conn_a, s.z.split.j.j());
        let t2 = tensor_norm_sq(&s.pk.ta, &s.z.split.g).unwrap();
        let nf = n as f64;
        let gen = s.z.split.j_h() + s.z.split.j_v() * 2.0;
        let coef = 12.0 * nf / ((2.0 * nf + 1.0) * t2);
        t.below(&format!("{m:?} u(1) trace formula"), (&gen + &tr * coef).amax() / gen.amax(), 1e-9);
    }
}

fn c11_submersion(t: &mut Tally) {
    for m in [BaseModel::S4, BaseModel::Cp2] {
        let s = setup(m, 1, 1.0, Structure::J1);
        let sub = &s.z.sub;
        for r in lemma1_checks(sub, &s.pk.lc, &s.pk.conn_a, &s.pk.ta) {
            t.below(&format!("{m:?} {}", r.name), r.value, 1e-9);
        }
        let gh = RTensor::from_matrix(&s.z.split.g_h());
        t.below(&format!("{m:?} g_H projectable"), projectability_check(&gh, sub, &s.z.split.h_proj), 1e-9);
        t.below(&format!("{m:?} span of I,J,K preserved"), quaternionic_rotation(sub, &s.z.split).1, 1e-9);
        let base = build_base(m, 1, 1.0).unwrap().curvature();
        t.below(&format!("{m:?} base curvature from R^a"), project_curvature(sub, &s.ra, &s.pk.ta).unwrap().max_abs_diff(&base), 1e-9);
        let a = oneill_a(sub, &s.pk.lc);
        t.below(&format!("{m:?} O'Neill"), oneill_curvature(sub, &s.r, &a).max_abs_diff(&base), 1e-9);
    }
}

fn c12_swap(t: &mut Tally) {
    let pair = |ta: &RTensor, j, p, q| {
        pq_project(ta, j, p, q).unwrap().add(&pq_project(ta, j, q, p).unwrap()).max_abs_diff(&ta.to_complex())
    };
    let s = setup(BaseModel::S4, 1, 1.0, Structure::J1);
    let sw = structure_swap(&s.z.split).unwrap();
    t.below("(2,1)+(1,2) under J1", pair(&s.pk.ta, &s.z.split.j, 2, 1), 1e-10);
    t.below("(3,0)+(0,3) under swapped J", pair(&s.pk.ta, &sw.j, 3, 0), 1e-10);
    let nk = setup(BaseModel::S4, 1, 1.0, Structure::J2);
    t.below("(3,0)+(0,3) under J2", pair(&nk.pk.ta, &nk.z.split.j, 3, 0), 1e-10);
    t.below("nearly Kahler parallel torsion", covariant_derivative_invariant(&nk.pk.conn_a, &nk.pk.ta).max_abs(), 1e-10);
}

fn c13_oracle(t: &mut Tally) {
    let h = oracle::DEFAULT_STEP;
    let tol = oracle::ORACLE_TOL;

    let s4 = build_base(BaseModel::S4, 1, 1.0).unwrap();
    let chart = oracle::s4_stereographic();
    let x = [0.3, -0.2, 0.1, 0.25];
    let want = oracle::curvature_invariants(&s4.curvature(), s4.space.g()).unwrap();
    let got = oracle::curvature_invariants(&oracle::fd_curvature(&chart, &x, h).unwrap(), &chart.metric(&x)).unwrap();
    t.below("S4 invariants", got.max_diff(&want), tol);

    // the twistor fibre at t = 1/4 over the unit sphere has curvature 4, like the Fubini-Study line
    let z = build_twistor(&s4, 0.25, Structure::J1).unwrap();
    let tot = &z.sub.total;
    let d = tot.dim();
    let unit = |i: usize| DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 });
    let k_hom = sectional_curvature(&curvature_of(tot, &levi_civita(tot)), &tot.metric, &unit(d - 2), &unit(d - 1));
    let cp1 = oracle::fubini_study(1);
    let y = [0.3, -0.2];
    let g = cp1.metric(&y);
    let r = oracle::fd_curvature(&cp1, &y, h).unwrap();
    let k_fd = r.at(&[0, 1, 1, 0]) / (g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(0, 1)]);
    t.below("CP1 fibre curvature", (k_fd - k_hom).abs() / k_hom, tol);

    let hp = build_base(BaseModel::Hpn, 1, 1.0).unwrap();
    let (t0, t1) = t0_t1(hp.scalar_curvature(), 1);
    let x = [0.05, 0.03, -0.04, 0.02, 0.03, -0.05];
    for tv in [t0, t1] {
        let z = build_twistor(&hp, tv, Structure::J1).unwrap();
        let tot = &z.sub.total;
        let want = oracle::curvature_invariants(&curvature_of(tot, &levi_civita(tot)), tot.g()).unwrap();
        let chart = oracle::cp3_twistor(tv);
        let got = oracle::curvature_invariants(&oracle::fd_curvature(&chart, &x, h).unwrap(), &chart.metric(&x)).unwrap();
        t.below(&format!("CP3 twistor t={tv}"), got.max_diff(&want), tol);
    }

    let x = [0.3, -0.2, 0.1, 0.25];
    let chart = oracle::s4_stereographic();
    let exact = oracle::constant_curvature(&chart.metric(&x), 1.0);
    let (_, _, ratio) = oracle::richardson_ratio(&chart, &x, 1e-2, &exact).unwrap();
    t.above("step halving ratio lower", ratio, 3.0);
    t.below("step halving ratio upper", ratio, 5.0);
}

fn skewlab(args: &[&str]) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_skewlab"))
        .args(args)
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .expect("running skewlab");
    (out.status.code(), out.stdout)
}

fn c14_determinism(t: &mut Tally) {
    let args = ["verify", "--base", "s4", "--t", "t1", "--seed", "7"];
    let (c1, a) = skewlab(&args);
    let (c2, b) = skewlab(&args);
    t.equal("exit codes", (c1, c2), (Some(0), Some(0)));
    t.equal("identical bytes", a == b && !a.is_empty(), true);
    let (c, _) = skewlab(&["verify", "--t", "1.7t1"]);
    t.equal("wrong t exit code", c, Some(1));
}

fn main() {
    let criteria: [(&str, fn(&mut Tally)); 14] = [
        ("norm identity", c1_norm_identity),
        ("fixed-space dimensions", c2_fixed_spaces),
        ("stabilizer", c3_stabilizer),
        ("curvature space", c4_curvature_space),
        ("twistor torsion", c5_torsion),
        ("parallel torsion dichotomy", c6_parallel_torsion),
        ("curvature identities at t1", c7_identities),
        ("Ricci formulas at t1", c8_ricci),
        ("decomposition", c9_decomposition),
        ("holonomy", c10_holonomy),
        ("submersion", c11_submersion),
        ("structure swap", c12_swap),
        ("oracle agreement", c13_oracle),
        ("determinism", c14_determinism),
    ];
    let mut red = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let mut tally = Tally::default();
        let outcome = catch_unwind(AssertUnwindSafe(|| f(&mut tally)));
        let line = match outcome {
            Err(_) => format!("FAIL criterion {}: {name}: panicked", k + 1),
            Ok(()) if tally.failures.is_empty() => format!("PASS criterion {}: {name} ({} comparisons)", k + 1, tally.count),
            Ok(()) => format!("FAIL criterion {}: {name}: {}", k + 1, tally.failures.join("; ")),
        };
        if !line.starts_with("PASS") {
            red += 1;
        }
        println!("{line}");
    }
    println!("{} of {} criteria passed", criteria.len() - red, criteria.len());
    if red > 0 {
        std::process::exit(1);
    }
}
