use skewlab::connect::*;
use skewlab::error::Error;
use skewlab::homog::{build_base, covariant_derivative_invariant, levi_civita, BaseModel, HomogeneousSpace};
use skewlab::linalg;
use skewlab::multilinear::{bianchi_b, pq_project, sigma_t, standard_j, tensor_norm_sq, ComplexStructureData, MetricData};
use skewlab::repthy::{build_rho, curvature_space, fixed_subspace, induced_action, unitary_algebra, PqFilter, RhoVariant};
use skewlab::twistor::{build_twistor, t0_t1, Structure, Twistor};
use skewlab::RTensor;

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

fn model_frame(s: &Setup) -> nalgebra::DMatrix<f64> {
    adapted_frame(&s.z.split, &s.pk.ta).0
}

#[test]
fn flat_space_is_integrable() {
    let m = 3;
    let flat = HomogeneousSpace::new("flat", 2 * m, vec![0.0; 216], vec![], (0..6).collect(), MetricData::identity(6)).unwrap();
    let j = ComplexStructureData::new(standard_j(m)).unwrap();
    assert_eq!(nijenhuis(&flat, &j).max_abs(), 0.0);
    let pk = canonical_connection(&flat, &j).unwrap();
    assert_eq!(pk.ta.max_abs(), 0.0);
}

#[test]
fn canonical_connection_at_t1() {
    let s = setup(BaseModel::S4, 1, 1.0, Structure::J1);
    let g = &s.z.split.g;
    assert!(s.pk.invariant_residual(&s.z.sub.total, &s.z.split.j) < 1e-10);
    assert!(s.pk.solve_mismatch < 1e-10);
    assert!(s.pk.solve_residual < 1e-10);
    assert!(s.pk.n.max_abs() < 1e-10);
    assert!(s.pk.ta.skew_residual() < 1e-12);
    assert!(covariant_derivative_invariant(&s.pk.conn_a, &s.pk.ta).max_abs() < 1e-10);
    assert!((tensor_norm_sq(&s.pk.ta, g).unwrap() - 12.0).abs() < 1e-9);
}

#[test]
fn kahler_case_has_no_torsion() {
    let s = setup(BaseModel::S4, 1, 2.0, Structure::J1);
    assert!(s.pk.ta.max_abs() < 1e-10);
    assert!(s.pk.conn_a.difference(&s.pk.lc) < 1e-10);
    assert!(s.ra.max_abs_diff(&s.r) < 1e-10);
    let (ric, _) = skewlab::homog::ricci_scalar(&s.r, &s.z.split.g);
    let (rica, _) = skewlab::homog::ricci_scalar(&s.ra, &s.z.split.g);
    assert!((ric - rica).amax() < 1e-10);
}

#[test]
fn nearly_kahler_branch() {
    let s = setup(BaseModel::S4, 1, 1.0, Structure::J2);
    let j = &s.z.split.j;
    assert!(s.pk.invariant_residual(&s.z.sub.total, j) < 1e-10);
    assert!(covariant_derivative_invariant(&s.pk.conn_a, &s.pk.ta).max_abs() < 1e-10);
    let mut sum = pq_project(&s.pk.ta, j, 3, 0).unwrap();
    sum = sum.add(&pq_project(&s.pk.ta, j, 0, 3).unwrap());
    assert!(sum.max_abs_diff(&s.pk.ta.to_complex()) < 1e-10);
    // same connection as the J1 one
    let s1 = setup(BaseModel::S4, 1, 1.0, Structure::J1);
    assert!(s.pk.conn_a.difference(&s1.pk.conn_a) < 1e-10);
}

#[test]
fn j2_off_t1_is_outside_the_class() {
    let b = build_base(BaseModel::S4, 1, 1.0).unwrap();
    let (_, t1) = t0_t1(b.scalar_curvature(), 1);
    for f in [0.5, 1.7] {
        let z = build_twistor(&b, f * t1, Structure::J2).unwrap();
        assert!(matches!(canonical_connection(&z.sub.total, &z.split.j), Err(Error::OutsideG1(_))));
    }
}

#[test]
fn curvature_relation_general_holds_everywhere() {
    for f in [0.7, 1.0, 1.5, 2.0] {
        let s = setup(BaseModel::S4, 1, f, Structure::J1);
        let res = curvature_relation_general(&s.r, &s.ra, &s.pk.ta, &s.pk.lc, &s.z.split.g).unwrap();
        assert!(res < 1e-9, "t = {f} t1: {res}");
    }
}

#[test]
fn curvature_identities_at_t1() {
    for (m, n) in [(BaseModel::S4, 1), (BaseModel::Cp2, 1), (BaseModel::Hpn, 2)] {
        let s = setup(m, n, 1.0, Structure::J1);
        let g = &s.z.split.g;
        assert!(curvature_relation_check(&s.r, &s.ra, &s.pk.ta, g).unwrap() < 1e-9, "{m:?}");
        assert!(bianchi_b(&s.ra).unwrap().max_abs_diff(&sigma_t(&s.pk.ta, g).unwrap()) < 1e-9, "{m:?}");
        assert!(s.ra.max_abs_diff(&s.ra.permuted(&[2, 3, 0, 1])) < 1e-9, "{m:?}");
        assert!(torsion_annihilation_residual(&s.ra, &s.pk.ta, g) < 1e-9, "{m:?}");
    }
}

#[test]
fn parallel_form_of_the_relation_fails_away_from_t0_t1() {
    let s = setup(BaseModel::S4, 1, 1.5, Structure::J1);
    assert!(curvature_relation_check(&s.r, &s.ra, &s.pk.ta, &s.z.split.g).unwrap() > 1e-3);
}

#[test]
fn zero_torsion_gives_equal_curvatures() {
    let s = setup(BaseModel::S4, 1, 1.0, Structure::J1);
    let zero = RTensor::covariant(6, 3);
    assert!(curvature_relation_check(&s.r, &s.r, &zero, &s.z.split.g).unwrap() < 1e-15);
}

#[test]
fn ricci_values_for_unit_sphere() {
    let s = setup(BaseModel::S4, 1, 1.0, Structure::J1);
    let rr = ricci_formulas_check(&s.r, &s.ra, &s.pk.ta, &s.z.split).unwrap();
    for v in [rr.ric_a, rr.s_a, rr.ric, rr.s, rr.ric_relation, rr.s_relation, rr.einstein] {
        assert!(v < 1e-9);
    }
    assert!((rr.s_value - 15.0).abs() < 1e-9);
    assert!((rr.ric_h - 2.5).abs() < 1e-9 && (rr.ric_v - 2.5).abs() < 1e-9);
    let g = s.z.split.g.g();
    let (rica, sa) = skewlab::homog::ricci_scalar(&s.ra, &s.z.split.g);
    assert!((rica - g * 2.0).amax() < 1e-9);
    assert!((sa - 12.0).abs() < 1e-9);
    assert!(rr.min_eig_ric_a > 0.0);
}

#[test]
fn quaternionic_plane_is_not_einstein() {
    let s = setup(BaseModel::Hpn, 2, 1.0, Structure::J1);
    let rr = ricci_formulas_check(&s.r, &s.ra, &s.pk.ta, &s.z.split).unwrap();
    assert!(rr.ric_a < 1e-9 && rr.ric < 1e-9);
    assert!((rr.ric_h / rr.ric_v - 7.0 / 6.0).abs() < 1e-9);
    assert!(rr.einstein > 1e-3);
}

#[test]
fn j_invariance_at_t1() {
    let s = setup(BaseModel::Cp2, 1, 1.0, Structure::J1);
    let j = s.z.split.j.j();
    assert!(s.ra.pull_slot(0, j).pull_slot(1, j).max_abs_diff(&s.ra) < 1e-9);
    assert!(s.ra.pull_slot(2, j).pull_slot(3, j).max_abs_diff(&s.ra) < 1e-9);
}

#[test]
fn decomposition() {
    let s = setup(BaseModel::S4, 1, 1.0, Structure::J1);
    let dec = decompose_curvature(&s.ra, &s.pk.ta, &s.z.split).unwrap();
    assert!(dec.r_hyper.max_abs() < 1e-9);
    assert!((dec.coefficient - 12.0 / 48.0).abs() < 1e-12);
    // b of the model part reproduces sigma
    let sig = sigma_t(&s.pk.ta, &s.z.split.g).unwrap();
    assert!(bianchi_b(&dec.r0a.scale(dec.coefficient)).unwrap().max_abs_diff(&sig) < 1e-9);

    let c = setup(BaseModel::Cp2, 1, 1.0, Structure::J1);
    let dec = decompose_curvature(&c.ra, &c.pk.ta, &c.z.split).unwrap();
    assert!(dec.r_hyper.max_abs() > 0.1);
    assert!(dec.vertical_residual(4) < 1e-9);
    assert!(dec.quaternionic_residual(&c.z.split) < 1e-9);
    assert!(dec.ricci_residual(&c.z.split.g) < 1e-9);
}

#[test]
fn model_tensors_are_algebraic_curvature_tensors() {
    let s = setup(BaseModel::Hpn, 1, 1.0, Structure::J1);
    let r0 = r0a(&s.z.split);
    assert!(r0.max_abs_diff(&r0.permuted(&[1, 0, 2, 3]).scale(-1.0)) < 1e-12);
    assert!(r0.max_abs_diff(&r0.permuted(&[2, 3, 0, 1])) < 1e-12);
    let r0lc = r0_levi_civita(&s.z.split);
    assert!(bianchi_b(&r0lc).unwrap().max_abs() < 1e-12);
}

#[test]
fn curvature_lies_in_the_algebraic_space() {
    let s = setup(BaseModel::S4, 1, 1.0, Structure::J1);
    let (e, lam) = adapted_frame(&s.z.split, &s.pk.ta);
    let cs = curvature_space(1).unwrap();
    let rm = s.ra.pull_all(&e).scale(1.0 / lam.norm_sqr());
    assert!(cs.projection_residual(&rm) < 1e-9 * rm.max_abs());
    let r0m = r0a(&s.z.split).pull_all(&e);
    assert!(cs.projection_residual(&r0m) < 1e-9 * r0m.max_abs());
}

#[test]
fn adapted_frame_is_standard() {
    let s = setup(BaseModel::Hpn, 2, 1.0, Structure::J1);
    let e = model_frame(&s);
    let g = s.z.split.g.g();
    let d = s.z.dim();
    assert!((e.transpose() * g * &e - nalgebra::DMatrix::identity(d, d)).amax() < 1e-12);
    let jm = e.clone().try_inverse().unwrap() * s.z.split.j.j() * &e;
    assert!((jm - standard_j(d / 2)).amax() < 1e-12);
}

#[test]
fn structure_swap_properties() {
    let s = setup(BaseModel::S4, 1, 1.0, Structure::J1);
    let sw = structure_swap(&s.z.split).unwrap();
    let back = structure_swap(&sw).unwrap();
    assert_eq!(back.j.j(), s.z.split.j.j());
    let t = &s.pk.ta;
    let mut sum = pq_project(t, &sw.j, 3, 0).unwrap();
    sum = sum.add(&pq_project(t, &sw.j, 0, 3).unwrap());
    assert!(sum.max_abs_diff(&t.to_complex()) < 1e-10);
    // the same connection preserves the swapped structure
    for l in &s.pk.conn_a.maps {
        assert!(linalg::commutator(l, sw.j.j()).amax() < 1e-10);
    }
    // the swap of J2 is Hermitian
    let s2 = setup(BaseModel::S4, 1, 1.0, Structure::J2);
    let sw2 = structure_swap(&s2.z.split).unwrap();
    assert!(nijenhuis(&s2.z.sub.total, &sw2.j).max_abs() < 1e-9);
}

#[test]
fn holonomy_of_unit_sphere_twistor() {
    let s = setup(BaseModel::S4, 1, 1.0, Structure::J1);
    let hol = holonomy_algebra(&s.z.sub.total, &s.pk.conn_a).unwrap();
    assert_eq!(hol.dim(), 4);
    assert!(hol.closure_residual() < 1e-9);
    assert!(hol.metric_residual(&s.z.split.g) < 1e-10);
    assert!(hol.j_residual(s.z.split.j.j()) < 1e-10);
    let h = hol.as_lie_algebra().unwrap().conjugated(&model_frame(&s)).unwrap();
    assert!(h.subspace_distance(&build_rho(1, RhoVariant::Rho).unwrap()) < 1e-9);
    // the torsion spans the fixed real forms
    let fx = fixed_subspace(&induced_action(&h, (0, 3), PqFilter::RealPair(2, 1)).unwrap());
    assert_eq!(fx.len(), 2);
}

#[test]
fn holonomy_of_quaternionic_plane_twistor() {
    let s = setup(BaseModel::Hpn, 2, 1.0, Structure::J1);
    let hol = holonomy_algebra(&s.z.sub.total, &s.pk.conn_a).unwrap();
    assert_eq!(hol.dim(), 11);
    let h = hol.as_lie_algebra().unwrap().conjugated(&model_frame(&s)).unwrap();
    assert!(h.subspace_distance(&build_rho(2, RhoVariant::Rho).unwrap()) < 1e-9);
}

#[test]
fn holonomy_over_complex_projective_plane_is_smaller() {
    let s = setup(BaseModel::Cp2, 1, 1.0, Structure::J1);
    let hol = holonomy_algebra(&s.z.sub.total, &s.pk.conn_a).unwrap();
    assert_eq!(hol.dim(), 2);
    let h = hol.as_lie_algebra().unwrap().conjugated(&model_frame(&s)).unwrap();
    assert!(build_rho(1, RhoVariant::Rho).unwrap().containment_residual(&h) < 1e-9);
}

#[test]
fn kahler_holonomy_is_unitary() {
    let s = setup(BaseModel::S4, 1, 2.0, Structure::J1);
    let hol = holonomy_algebra(&s.z.sub.total, &s.pk.conn_a).unwrap();
    assert_eq!(hol.dim(), 9);
    let h = hol.as_lie_algebra().unwrap().conjugated(&model_frame(&s)).unwrap();
    assert!(unitary_algebra(3).containment_residual(&h) < 1e-9);
}

#[test]
fn u1_trace_coefficient() {
    for (m, n) in [(BaseModel::S4, 1), (BaseModel::Hpn, 2)] {
        let s = setup(m, n, 1.0, Structure::J1);
        let tr = u1_trace(&s.z.sub.total, &s.pk.conn_a, s.z.split.j.j());
        let t2 = tensor_norm_sq(&s.pk.ta, &s.z.split.g).unwrap();
        let nf = n as f64;
        let gen = s.z.split.j_h() + s.z.split.j_v() * 2.0;
        assert!((&gen + &tr * (6.0 * nf / ((nf + 1.0) * t2))).amax() < 1e-9, "{m:?}");
    }
}

#[test]
fn torsion_is_nondegenerate_at_t1() {
    let s = setup(BaseModel::S4, 1, 1.0, Structure::J1);
    assert!(torsion_nondegeneracy(&s.pk.ta, &s.z.split.g) > 1e-6);
    let k = setup(BaseModel::S4, 1, 2.0, Structure::J1);
    assert!(torsion_nondegeneracy(&k.pk.ta, &k.z.split.g) < 1e-9);
}

#[test]
fn dc_omega_and_kahler_form() {
    let s = setup(BaseModel::S4, 1, 1.0, Structure::J1);
    let om = kahler_form(&s.z.split.g, &s.z.split.j);
    assert!(om.skew_residual() < 1e-14);
    assert!(om.max_abs_diff(&s.pk.omega) == 0.0);
    assert!(dc_omega(&s.z.sub.total, &s.z.split.j).max_abs_diff(&s.pk.ta.scale(-1.0)) < 1e-10);
}

#[test]
fn levi_civita_matches_package() {
    let s = setup(BaseModel::Cp2, 1, 0.5, Structure::J1);
    assert!(levi_civita(&s.z.sub.total).difference(&s.pk.lc) == 0.0);
}
