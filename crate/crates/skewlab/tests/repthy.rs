use nalgebra::{DMatrix, DVector};
use skewlab::linalg::{self, complexify, C64};
use skewlab::multilinear::{coframe, frame_vector, tensor_norm_sq, MetricData};
use skewlab::repthy::*;

fn fixed_dim(n: usize, filter: PqFilter) -> usize {
    let rho = build_rho(n, RhoVariant::Rho).unwrap();
    fixed_subspace(&induced_action(&rho, (0, 3), filter).unwrap()).len()
}

#[test]
fn rho_dimensions() {
    assert_eq!(build_rho(1, RhoVariant::Rho).unwrap().len(), 4);
    assert_eq!(build_rho(2, RhoVariant::Rho).unwrap().len(), 11);
    assert_eq!(build_rho(2, RhoVariant::Rho2).unwrap().len(), 11);
}

#[test]
fn rho_is_a_unitary_subalgebra() {
    for n in [1, 2] {
        let d = 4 * n + 2;
        let j = skewlab::multilinear::standard_j(2 * n + 1);
        for v in [RhoVariant::Rho, RhoVariant::Rho2] {
            let rho = build_rho(n, v).unwrap();
            assert!(rho.closure_residual() < 1e-12);
            assert!(unitary_algebra(2 * n + 1).containment_residual(&rho) < 1e-12);
            for x in &rho.basis {
                assert_eq!(x.nrows(), d);
                assert!((x + x.transpose()).amax() < 1e-14);
                assert!(linalg::commutator(x, &j).amax() < 1e-14);
            }
        }
    }
}

#[test]
fn u1_generator_weights() {
    for n in [1, 2] {
        let d = 4 * n + 2;
        let v10 = frame_vector(2 * n, d);
        let v01 = v10.map(|z| z.conj());
        let mi2 = C64::new(0.0, -2.0);
        let x = complexify(&realify(&u1_generator(n, RhoVariant::Rho)));
        assert!((&x * &v01 - &v01 * mi2).norm() < 1e-14);
        let x2 = complexify(&realify(&u1_generator(n, RhoVariant::Rho2)));
        assert!((&x2 * &v10 - &v10 * mi2).norm() < 1e-14);
        // forms carry the dual weight
        let eb = coframe(2 * n, d).conj();
        assert!(act(&realify(&u1_generator(n, RhoVariant::Rho)), &eb).max_abs_diff(&eb.scale(C64::new(0.0, 2.0))) < 1e-14);
    }
}

#[test]
fn rho_annihilates_t0() {
    for n in [1, 2] {
        let t = t0(n);
        for x in &build_rho(n, RhoVariant::Rho).unwrap().basis {
            assert!(act(x, &t).max_abs() < 1e-13);
        }
    }
}

#[test]
fn fixed_complex_21_forms_are_a_line() {
    assert_eq!(fixed_dim(1, PqFilter::Complex(2, 1)), 1);
    assert_eq!(fixed_dim(2, PqFilter::Complex(2, 1)), 1);
    let rho = build_rho(1, RhoVariant::Rho).unwrap();
    let fx = fixed_subspace(&induced_action(&rho, (0, 3), PqFilter::Complex(2, 1)).unwrap());
    let q: Vec<DVector<C64>> = fx.iter().map(|t| t.to_dvector()).collect();
    let t = t0(1);
    assert!(linalg::projection_residual(&q, &t.to_dvector()) < 1e-12);
}

#[test]
fn fixed_real_pair_is_two_dimensional() {
    assert_eq!(fixed_dim(1, PqFilter::RealPair(2, 1)), 2);
    assert_eq!(fixed_dim(2, PqFilter::RealPair(2, 1)), 2);
}

#[test]
fn carrier_dimensions() {
    let rho = build_rho(1, RhoVariant::Rho).unwrap();
    let size = |f| induced_action(&rho, (0, 3), f).unwrap().carrier.basis.len();
    assert_eq!(size(PqFilter::Complex(2, 1)), 9);
    assert_eq!(size(PqFilter::Complex(3, 0)), 1);
    assert_eq!(size(PqFilter::RealPair(2, 1)), 18);
    let full = induced_action(&rho, (0, 2), PqFilter::Full).unwrap();
    assert_eq!(full.carrier.basis.len(), 36);
    assert!(full.bracket_residual(&rho) < 1e-12);
    assert!(full.leak < 1e-12);
}

#[test]
fn trivial_algebra_fixes_everything() {
    let triv = MatrixLieAlgebra::new("trivial", 6, Vec::new()).unwrap();
    let act = induced_action(&triv, (0, 3), PqFilter::Complex(2, 1)).unwrap();
    assert_eq!(fixed_subspace(&act).len(), 9);
}

#[test]
fn invariant_two_forms_of_unitary_algebra() {
    // Only the Kähler form is u(3)-invariant among real (1,1)+(1,1) pairs.
    let u3 = unitary_algebra(3);
    let act = induced_action(&u3, (0, 2), PqFilter::Complex(1, 1)).unwrap();
    assert_eq!(fixed_subspace(&act).len(), 1);
}

#[test]
fn stabilizer_of_t0() {
    for n in [1, 2] {
        let rho = build_rho(n, RhoVariant::Rho).unwrap();
        let stab = stabilizer_algebra(&t0(n), &unitary_algebra(2 * n + 1)).unwrap();
        assert_eq!(stab.len(), n * (2 * n + 1) + 1);
        assert!(stab.subspace_distance(&rho) < 1e-9);
    }
}

#[test]
fn stabilizer_of_zero_is_everything() {
    let z = skewlab::CTensor::zeros(6, (0, 3));
    assert_eq!(stabilizer_algebra(&z, &unitary_algebra(3)).unwrap().len(), 9);
}

#[test]
fn curvature_space_dimensions() {
    let c1 = curvature_space(1).unwrap();
    assert_eq!(c1.s2_dim, 10);
    assert_eq!(c1.ker_b_dim, 5);
    assert_eq!(c1.dim(), 6);
    let c2 = curvature_space(2).unwrap();
    assert_eq!(c2.s2_dim, 66);
    assert_eq!(c2.ker_b_dim, 35);
    assert_eq!(c2.dim(), 36);
}

#[test]
fn norm_identity_values() {
    for n in [1, 2] {
        for l in [C64::new(1.0, 0.0), C64::new(1.0, 1.0), C64::new(0.3, -2.0)] {
            let v = tensor_norm_sq(&torsion_family(n, l), &MetricData::identity(4 * n + 2)).unwrap();
            assert!((v - 12.0 * n as f64 * l.norm_sqr()).abs() < 1e-10);
        }
    }
}

#[test]
fn algebra_rejects_dependent_basis() {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    assert!(MatrixLieAlgebra::new("dup", 2, vec![a.clone(), a * 2.0]).is_err());
}

#[test]
fn conjugation_preserves_dimension() {
    let rho = build_rho(1, RhoVariant::Rho).unwrap();
    let q = DMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0).qr().q();
    let c = rho.conjugated(&q).unwrap();
    assert_eq!(c.len(), 4);
    assert!(c.closure_residual() < 1e-12);
}

#[test]
fn sp_and_u_bases() {
    assert_eq!(sp_basis(1).len(), 3);
    assert_eq!(sp_basis(2).len(), 10);
    assert_eq!(u_basis(3).len(), 9);
}

#[test]
fn scalars_carry_the_zero_action() {
    let rho = build_rho(1, RhoVariant::Rho).unwrap();
    let a = induced_action(&rho, (0, 0), PqFilter::Full).unwrap();
    assert_eq!(a.carrier.basis.len(), 1);
    assert!(a.generators.iter().all(|g| g.norm() == 0.0));
}

#[test]
fn full_unitary_algebra_moves_t0() {
    let t = t0(1);
    assert!(unitary_algebra(3).basis.iter().any(|x| act(x, &t).max_abs() > 0.1));
}
