use approx::assert_relative_eq;
use num_complex::Complex64;

use super::*;
use crate::algebra::{AlgebraDescriptor, DEFAULT_TOL};
use crate::builtin::{example1_default, example2, example2_tight_bound};
use crate::module::GlPlusCertificate;
use crate::random::{self, rng_for, Caps};

fn parseval_singleton() -> (FrameFamily, GlPlusCertificate) {
    let module = ModuleDescriptor::new(AlgebraDescriptor::full(2), 1).unwrap();
    let frame = FrameFamily::new(
        module,
        MeasureSpace::counting(1).unwrap(),
        vec![ModuleElement::unit(module, 0)],
    )
    .unwrap();
    (frame, GlPlusCertificate::identity(module))
}

fn diag_entries(a: &AlgebraElement) -> Vec<f64> {
    a.diagonal().iter().map(|z| z.re).collect()
}

#[test]
fn analysis_of_zero_is_zero() {
    let (frame, _) = example1_default(1.0).unwrap();
    let c = analysis(&frame, &ModuleElement::zero(frame.module())).unwrap();
    assert!(c.coeffs().iter().all(|a| a.operator_norm() == 0.0));
}

#[test]
fn example1_analysis_coefficients() {
    let (frame, _) = example1_default(2.0).unwrap();
    let (a, b) = (Complex64::new(1.5, -0.5), Complex64::new(-2.0, 0.25));
    let x = ModuleElement::singleton(AlgebraElement::from_diagonal(vec![a, b]));
    let c = analysis(&frame, &x).unwrap();
    for (coeff, &w) in c.coeffs().iter().zip(frame.space().nodes()) {
        assert_eq!(coeff.diagonal(), vec![a * w, b * (w / 2.0)]);
    }
}

#[test]
fn synthesis_of_zero_and_of_unit_coefficient() {
    let (frame, _) = parseval_singleton();
    let algebra = frame.module().algebra();
    let zero = CoefficientVector::new(frame.space().clone(), vec![AlgebraElement::zero(algebra)]).unwrap();
    assert_eq!(synthesis(&frame, &zero).unwrap(), ModuleElement::zero(frame.module()));
    let unit = CoefficientVector::new(frame.space().clone(), vec![AlgebraElement::identity(algebra)]).unwrap();
    assert_eq!(synthesis(&frame, &unit).unwrap(), frame.vectors()[0]);
}

#[test]
fn synthesis_of_analysis_is_the_frame_operator() {
    let mut rng = rng_for(3, 0);
    for case in 0..8 {
        let inst = random::random_instance(21, case, Caps::default()).unwrap();
        let s = frame_operator(&inst.frame).unwrap();
        for x in random::sample_elements(&mut rng, inst.module, 5) {
            let coeffs = analysis(&inst.frame, &x).unwrap();
            let direct = synthesis(&inst.frame, &coeffs).unwrap();
            let via_s = s.apply(&x).unwrap();
            assert!(direct.distance(&via_s).unwrap() <= 1e-12 * via_s.module_norm().max(1.0));
            // ‖c‖² in l² equals ‖⟨Sx, x⟩‖.
            let energy = via_s.inner_product(&x).unwrap().operator_norm();
            assert_relative_eq!(coeffs.l2_norm().unwrap().powi(2), energy, max_relative = 1e-12);
        }
    }
}

#[test]
fn parseval_singleton_has_identity_frame_operator() {
    let (frame, c) = parseval_singleton();
    let s = frame_operator(&frame).unwrap();
    assert_eq!(s.distance(&ModuleOperator::identity(frame.module())).unwrap(), 0.0);
    let report = is_controlled_frame(&frame, &c, DEFAULT_TOL).unwrap();
    assert!(report.is_frame);
    assert_eq!(report.tightness, Some(Tightness::Parseval));
    let bounds = optimal_scalar_bounds(&s, DEFAULT_TOL).unwrap();
    assert_eq!((bounds.lower(), bounds.upper()), (1.0, 1.0));
}

#[test]
fn example1_frame_operators() {
    for alpha in [0.5, 1.0, 3.0] {
        let (frame, c) = example1_default(alpha).unwrap();
        let s = frame_operator(&frame).unwrap();
        let got = diag_entries(s.coeff(0, 0));
        assert!((got[0] - 1.0 / 3.0).abs() < 1e-14 && (got[1] - 1.0 / 12.0).abs() < 1e-14);
        let s_c = controlled_frame_operator(&frame, &c).unwrap();
        let got = diag_entries(s_c.coeff(0, 0));
        assert!((got[0] - alpha / 3.0).abs() < 1e-12 && (got[1] - alpha / 12.0).abs() < 1e-12);
        let report = is_controlled_frame(&frame, &c, DEFAULT_TOL).unwrap();
        let bounds = report.bounds.unwrap();
        assert_relative_eq!(bounds.lower(), alpha / 12.0, max_relative = 1e-10);
        assert_relative_eq!(bounds.upper(), alpha / 3.0, max_relative = 1e-10);
        assert_eq!(report.tightness, Some(Tightness::General));
    }
}

#[test]
fn example2_controlled_operator_is_multiplication() {
    let (frame, c) = example2(4.0, 7).unwrap();
    let s_c = controlled_frame_operator(&frame, &c).unwrap();
    let got = diag_entries(s_c.coeff(0, 0));
    for (p, v) in got.iter().enumerate() {
        assert_relative_eq!(*v, 4.0 / ((p + 1) as f64).powi(2), max_relative = 1e-14);
    }
}

#[test]
fn controlled_operator_factors_through_the_controller() {
    // Holds even for a controller that does not commute with S.
    let mut rng = rng_for(5, 1);
    for case in 0..8 {
        let inst = random::random_instance(4, case, Caps::default()).unwrap();
        let r = random::operator(&mut rng, inst.module);
        let c_op = r
            .adjoint()
            .compose(&r)
            .unwrap()
            .try_add(&ModuleOperator::identity(inst.module))
            .unwrap();
        let c = c_op.certify_gl_plus(DEFAULT_TOL).unwrap();
        let s = frame_operator(&inst.frame).unwrap();
        let s_c = controlled_frame_operator(&inst.frame, &c).unwrap();
        let factored = c_op.compose(&s).unwrap();
        assert!(s_c.distance(&factored).unwrap() <= 1e-12 * factored.op_norm());
    }
}

#[test]
fn non_commuting_controller_is_not_a_frame_controller() {
    let module = ModuleDescriptor::new(AlgebraDescriptor::full(1), 2).unwrap();
    let e0 = ModuleElement::unit(module, 0);
    let e1 = ModuleElement::unit(module, 1).scale_real(2.0);
    let frame = FrameFamily::new(module, MeasureSpace::counting(2).unwrap(), vec![e0, e1]).unwrap();
    let mut rng = rng_for(8, 0);
    let r = random::operator(&mut rng, module);
    let c = r
        .adjoint()
        .compose(&r)
        .unwrap()
        .try_add(&ModuleOperator::identity(module))
        .unwrap()
        .certify_gl_plus(DEFAULT_TOL)
        .unwrap();
    let report = is_controlled_frame(&frame, &c, DEFAULT_TOL).unwrap();
    assert!(!report.diagnostics.self_adjoint);
    assert!(!report.is_frame);
}

#[test]
fn zero_vector_is_not_a_frame() {
    let module = ModuleDescriptor::new(AlgebraDescriptor::full(2), 1).unwrap();
    let frame = FrameFamily::new(
        module,
        MeasureSpace::counting(1).unwrap(),
        vec![ModuleElement::zero(module)],
    )
    .unwrap();
    let report = is_controlled_frame(&frame, &GlPlusCertificate::identity(module), DEFAULT_TOL).unwrap();
    assert!(!report.is_frame);
    assert!(report.bounds.is_none());
    assert!(!report.diagnostics.invertible);
    assert!(matches!(
        reconstruct(&frame, &GlPlusCertificate::identity(module), &ModuleElement::unit(module, 0), 1e-10),
        Err(Error::NotAFrame(_))
    ));
}

#[test]
fn optimal_bounds_reject_bad_operators() {
    let module = ModuleDescriptor::new(AlgebraDescriptor::full(2), 1).unwrap();
    let neg = ModuleOperator::scalar(module, -1.0);
    assert!(matches!(optimal_scalar_bounds(&neg, DEFAULT_TOL), Err(Error::NotPositive { .. })));
    let mut rng = rng_for(1, 1);
    let skew = random::operator(&mut rng, module);
    assert!(matches!(optimal_scalar_bounds(&skew, DEFAULT_TOL), Err(Error::NotSelfAdjoint { .. })));
}

#[test]
fn optimal_bounds_recover_planted_spectrum_and_are_extremal() {
    for case in 0..10 {
        let inst = random::random_instance(13, case, Caps::default()).unwrap();
        let s = frame_operator(&inst.frame).unwrap();
        let b = optimal_scalar_bounds(&s, DEFAULT_TOL).unwrap();
        assert_relative_eq!(b.lower(), inst.planted_spectrum[0], max_relative = 1e-10);
        assert_relative_eq!(b.upper(), *inst.planted_spectrum.last().unwrap(), max_relative = 1e-10);
        assert!(sandwich_holds(&s, &b, DEFAULT_TOL));
        assert!(is_extremal(&s, &b, 1e-6 * b.upper(), DEFAULT_TOL));
    }
}

#[test]
fn norm_form_on_example1() {
    let (frame, c) = example1_default(1.0).unwrap();
    let bounds = ScalarBounds::new(1.0 / 12.0, 1.0 / 3.0).unwrap();
    let zero = [ModuleElement::zero(frame.module())];
    assert!(norm_form_check(&frame, &c, &bounds, &zero, DEFAULT_TOL).unwrap());
    let mut rng = rng_for(2, 0);
    let xs = random::sample_elements(&mut rng, frame.module(), 200);
    assert!(norm_form_check(&frame, &c, &bounds, &xs, DEFAULT_TOL).unwrap());

    let s_c = controlled_frame_operator(&frame, &c).unwrap();
    let (bottom, _) = s_c.extremal_witnesses();
    let collapsed = ScalarBounds::new(1.0 / 3.0, 1.0 / 3.0).unwrap();
    assert!(!norm_form_check(&frame, &c, &collapsed, &[bottom], DEFAULT_TOL).unwrap());
}

#[test]
fn conversions_on_example1() {
    let (frame, c) = example1_default(3.0).unwrap();
    let controlled = ScalarBounds::new(3.0 / 12.0, 3.0 / 3.0).unwrap();
    let plain = convert_controlled_to_plain(&controlled, &c).unwrap();
    assert_relative_eq!(plain.lower(), 1.0 / 12.0, max_relative = 1e-15);
    assert_relative_eq!(plain.upper(), 1.0 / 3.0, max_relative = 1e-15);
    assert!(sandwich_holds(&frame_operator(&frame).unwrap(), &plain, DEFAULT_TOL));

    let back = convert_plain_to_controlled(&plain, &c).unwrap();
    assert_relative_eq!(back.lower(), controlled.lower(), max_relative = 1e-15);
    assert_relative_eq!(back.upper(), controlled.upper(), max_relative = 1e-15);

    let id = GlPlusCertificate::identity(frame.module());
    assert_eq!(convert_controlled_to_plain(&plain, &id).unwrap(), plain);
    assert_eq!(convert_plain_to_controlled(&plain, &id).unwrap(), plain);
}

#[test]
fn conversions_are_sound_on_random_instances() {
    for case in 0..12 {
        let inst = random::random_instance(17, case, Caps::default()).unwrap();
        let s = frame_operator(&inst.frame).unwrap();
        let s_c = controlled_frame_operator(&inst.frame, &inst.controller).unwrap();
        let plain = optimal_scalar_bounds(&s, DEFAULT_TOL).unwrap();
        let controlled = optimal_scalar_bounds(&s_c, DEFAULT_TOL).unwrap();
        let to_c = convert_plain_to_controlled(&plain, &inst.controller).unwrap();
        let to_p = convert_controlled_to_plain(&controlled, &inst.controller).unwrap();
        assert!(sandwich_holds(&s_c, &to_c, DEFAULT_TOL), "case {case}");
        assert!(sandwich_holds(&s, &to_p, DEFAULT_TOL), "case {case}");
    }
}

#[test]
fn statement_exponent_fails_on_adversarial_instance() {
    let inst = random::random_instance(17, 1, Caps::default()).unwrap();
    assert!(inst.adversarial);
    let s = frame_operator(&inst.frame).unwrap();
    let s_c = controlled_frame_operator(&inst.frame, &inst.controller).unwrap();
    let plain = optimal_scalar_bounds(&s, DEFAULT_TOL).unwrap();
    let sound = match convert_plain_to_controlled_with(&plain, &inst.controller, ExponentConvention::Statement) {
        Ok(b) => sandwich_holds(&s_c, &b, DEFAULT_TOL),
        Err(_) => false,
    };
    assert!(!sound);
}

#[test]
fn neumann_on_identity_takes_one_step() {
    let (frame, _) = parseval_singleton();
    let id = ModuleOperator::identity(frame.module());
    let mut rng = rng_for(4, 4);
    let y = random::module_element(&mut rng, frame.module());
    let one = ScalarBounds::new(1.0, 1.0).unwrap();
    let sol = neumann_inverse_apply(&id, &one, &y, 1e-14, 10).unwrap();
    assert_eq!(sol.iterations, 1);
    assert_eq!(sol.solution, y);
}

#[test]
fn neumann_contracts_by_three_quarters_on_example1() {
    let (frame, c) = example1_default(1.0).unwrap();
    let s_c = controlled_frame_operator(&frame, &c).unwrap();
    let bounds = optimal_scalar_bounds(&s_c, DEFAULT_TOL).unwrap();
    assert_relative_eq!(bounds.contraction_factor(), 0.75, max_relative = 1e-12);
    let y = ModuleElement::singleton(AlgebraElement::from_real_diagonal(&[0.3, 1.0]));
    let sol = neumann_inverse_apply(&s_c, &bounds, &y, 1e-12, 200).unwrap();
    for pair in sol.residuals.windows(2) {
        assert!(pair[1] <= (0.75 + 1e-10) * pair[0]);
    }
    let residual = y.try_sub(&s_c.apply(&sol.solution).unwrap()).unwrap();
    assert!(residual.module_norm() <= 1e-12 * y.module_norm());
    assert_eq!(sol.true_residual, residual.module_norm() / y.module_norm());
}

#[test]
fn neumann_reports_exhaustion() {
    let (frame, c) = example1_default(1.0).unwrap();
    let s_c = controlled_frame_operator(&frame, &c).unwrap();
    let bounds = optimal_scalar_bounds(&s_c, DEFAULT_TOL).unwrap();
    let y = ModuleElement::singleton(AlgebraElement::from_real_diagonal(&[0.3, 1.0]));
    assert!(matches!(
        neumann_inverse_apply(&s_c, &bounds, &y, 1e-12, 3),
        Err(Error::MaxIterExceeded { iterations: 3, .. })
    ));
}

#[test]
fn reconstruction() {
    let (frame, c) = parseval_singleton();
    let mut rng = rng_for(6, 0);
    let x = random::module_element(&mut rng, frame.module());
    assert_eq!(reconstruct(&frame, &c, &x, 1e-12).unwrap().estimate, x);

    let (frame, c) = example1_default(1.0).unwrap();
    for x in random::sample_elements(&mut rng, frame.module(), 10) {
        let rec = reconstruct(&frame, &c, &x, 1e-12).unwrap();
        assert!(rec.estimate.distance(&x).unwrap() <= 1e-10 * x.module_norm());
        assert!(rec.iterations <= 120);
    }

    for case in 0..6 {
        let inst = random::random_instance(31, case, Caps::default()).unwrap();
        let x = random::module_element(&mut rng, inst.module);
        let rec = reconstruct(&inst.frame, &inst.controller, &x, 1e-10).unwrap();
        assert!(rec.estimate.distance(&x).unwrap() <= 1e-9 * x.module_norm());
    }
}

#[test]
fn transform_by_identity_and_by_two() {
    let (frame, c) = example1_default(3.0).unwrap();
    let id = ModuleOperator::identity(frame.module());
    let same = transform_frame(&id, &frame, &c, DEFAULT_TOL).unwrap();
    assert_eq!(same.family, frame);
    assert_relative_eq!(same.bounds.lower(), 0.25, max_relative = 1e-12);

    let two = ModuleOperator::scalar(frame.module(), 2.0);
    let doubled = transform_frame(&two, &frame, &c, DEFAULT_TOL).unwrap();
    assert_relative_eq!(doubled.bounds.lower(), 4.0 * 0.25, max_relative = 1e-12);
    assert_relative_eq!(doubled.bounds.upper(), 4.0 * 1.0, max_relative = 1e-12);
    let s_c = controlled_frame_operator(&frame, &c).unwrap();
    let new_s_c = controlled_frame_operator(&doubled.family, &c).unwrap();
    assert!(new_s_c.distance(&s_c.scale_real(4.0)).unwrap() < 1e-12);
}

#[test]
fn transform_identity_on_random_commuting_pairs() {
    for case in 0..10 {
        let inst = random::random_instance(41, case, Caps::default()).unwrap();
        let k = &inst.transform;
        let out = transform_frame(k, &inst.frame, &inst.controller, DEFAULT_TOL).unwrap();
        let s_c = controlled_frame_operator(&inst.frame, &inst.controller).unwrap();
        let predicted = k.compose(&s_c).unwrap().compose(&k.adjoint()).unwrap();
        let actual = controlled_frame_operator(&out.family, &inst.controller).unwrap();
        assert!(actual.distance(&predicted).unwrap() <= 1e-10 * predicted.op_norm());
        assert!(sandwich_holds(&actual, &out.bounds, DEFAULT_TOL));
    }
}

#[test]
fn transform_preconditions() {
    let (frame, c) = example1_default(1.0).unwrap();
    let zero = ModuleOperator::zero(frame.module());
    assert!(matches!(
        transform_frame(&zero, &frame, &c, DEFAULT_TOL),
        Err(Error::NotSurjective { .. })
    ));

    let inst = random::random_instance(2, 0, Caps { max_dim: 2, max_rank: 3, max_nodes: 10 }).unwrap();
    let mut rng = rng_for(2, 9);
    let module = inst.module;
    let r = random::operator(&mut rng, module);
    let c = r
        .adjoint()
        .compose(&r)
        .unwrap()
        .try_add(&ModuleOperator::identity(module))
        .unwrap()
        .certify_gl_plus(DEFAULT_TOL)
        .unwrap();
    let k = random::operator(&mut rng, module);
    if module.flat_dim() > 1 {
        assert!(matches!(
            transform_frame(&k, &inst.frame, &c, DEFAULT_TOL),
            Err(Error::NonCommuting { .. })
        ));
    }
}

#[test]
fn star_bounds_on_parseval_frame() {
    let (frame, c) = parseval_singleton();
    let one = AlgebraElement::identity(frame.module().algebra());
    let sb = StarBounds::new(one.clone(), one).unwrap();
    assert!(verify_star_bounds(&frame, &c, &sb, DEFAULT_TOL, 50, 0).unwrap().holds);
    let derived = derive_tight_star_bound(&frame, &c, DEFAULT_TOL);
    assert!(matches!(derived, Err(Error::NotCommutative)));
}

#[test]
fn example2_tight_star_bound() {
    for alpha in [1.0, 4.0] {
        let n = 100;
        let (frame, c) = example2(alpha, n).unwrap();
        let derived = derive_tight_star_bound(&frame, &c, DEFAULT_TOL).unwrap();
        let expected = example2_tight_bound(alpha, n);
        assert!(derived.lower().distance(&expected).unwrap() <= 1e-12);
        assert_eq!(derived.lower(), derived.upper());

        let check = verify_star_bounds(&frame, &c, &derived, DEFAULT_TOL, 200, 99).unwrap();
        assert!(check.holds);
        assert!(check.max_lower_gap <= 1e-10 * check.max_scale.max(1.0));
        assert!(check.max_upper_gap <= 1e-10 * check.max_scale.max(1.0));

        let bumped = StarBounds::new(expected.scale_real(1.01), expected.clone()).unwrap();
        assert!(!verify_star_bounds(&frame, &c, &bumped, DEFAULT_TOL, 200, 99).unwrap().holds);
    }
}

#[test]
fn example1_tight_star_bound() {
    let alpha: f64 = 2.0;
    let (frame, c) = example1_default(alpha).unwrap();
    let derived = derive_tight_star_bound(&frame, &c, DEFAULT_TOL).unwrap();
    let want = [(alpha / 3.0).sqrt(), (alpha / 12.0).sqrt()];
    for (got, want) in diag_entries(derived.lower()).iter().zip(want) {
        assert_relative_eq!(*got, want, max_relative = 1e-12);
    }
}

#[test]
fn tight_star_bound_needs_a_multiplication_operator() {
    let algebra = AlgebraDescriptor::diagonal(2);
    let module = ModuleDescriptor::new(algebra, 2).unwrap();
    let mixed = ModuleElement::new(
        module,
        vec![AlgebraElement::identity(algebra), AlgebraElement::identity(algebra)],
    )
    .unwrap();
    let frame = FrameFamily::new(
        module,
        MeasureSpace::counting(2).unwrap(),
        vec![mixed, ModuleElement::unit(module, 0)],
    )
    .unwrap();
    assert!(matches!(
        derive_tight_star_bound(&frame, &GlPlusCertificate::identity(module), DEFAULT_TOL),
        Err(Error::NotMultiplicationOperator { .. })
    ));
}

#[test]
fn star_conversion_on_example2() {
    let alpha = 4.0;
    let (frame, c) = example2(alpha, 12).unwrap();
    let controlled = derive_tight_star_bound(&frame, &c, DEFAULT_TOL).unwrap();
    let plain = convert_star_bounds(&controlled, &c, StarConversion::ControlledToPlain).unwrap();
    assert!(plain.lower().distance(&example2_tight_bound(1.0, 12)).unwrap() < 1e-14);
    let id = GlPlusCertificate::identity(frame.module());
    assert!(verify_star_bounds(&frame, &id, &plain, DEFAULT_TOL, 200, 5).unwrap().holds);
    assert_eq!(
        convert_star_bounds(&plain, &id, StarConversion::PlainToControlled).unwrap(),
        plain
    );
}

#[test]
fn star_conversion_is_sound_on_random_instances() {
    for case in 0..8 {
        let inst = random::random_instance(43, case, Caps::default()).unwrap();
        let id = GlPlusCertificate::identity(inst.module);
        let s = frame_operator(&inst.frame).unwrap();
        let s_c = controlled_frame_operator(&inst.frame, &inst.controller).unwrap();
        let algebra = inst.module.algebra();
        let plain = StarBounds::from_scalar(optimal_scalar_bounds(&s, DEFAULT_TOL).unwrap(), algebra);
        let controlled = StarBounds::from_scalar(optimal_scalar_bounds(&s_c, DEFAULT_TOL).unwrap(), algebra);
        let to_c = convert_star_bounds(&plain, &inst.controller, StarConversion::PlainToControlled).unwrap();
        let to_p = convert_star_bounds(&controlled, &inst.controller, StarConversion::ControlledToPlain).unwrap();
        assert!(verify_star_bounds(&inst.frame, &inst.controller, &to_c, DEFAULT_TOL, 200, case).unwrap().holds);
        assert!(verify_star_bounds(&inst.frame, &id, &to_p, DEFAULT_TOL, 200, case).unwrap().holds);
    }
}

#[test]
fn star_transform() {
    let (frame, c) = example2(1.0, 8).unwrap();
    let sb = derive_tight_star_bound(&frame, &c, DEFAULT_TOL).unwrap();
    let two = ModuleOperator::scalar(frame.module(), 2.0);
    let out = transform_star_frame(&two, &frame, &c, &sb, DEFAULT_TOL).unwrap();
    assert!(verify_star_bounds(&out.family, &c, &out.bounds, DEFAULT_TOL, 200, 1).unwrap().holds);
    let id = ModuleOperator::identity(frame.module());
    let same = transform_star_frame(&id, &frame, &c, &sb, DEFAULT_TOL).unwrap();
    assert_eq!(same.family, frame);
    assert_eq!(same.bounds, sb);

    for case in 0..6 {
        let inst = random::random_instance(47, case, Caps::default()).unwrap();
        let s_c = controlled_frame_operator(&inst.frame, &inst.controller).unwrap();
        let sb = StarBounds::from_scalar(optimal_scalar_bounds(&s_c, DEFAULT_TOL).unwrap(), inst.module.algebra());
        let out = transform_star_frame(&inst.transform, &inst.frame, &inst.controller, &sb, DEFAULT_TOL).unwrap();
        assert!(verify_star_bounds(&out.family, &inst.controller, &out.bounds, DEFAULT_TOL, 200, case).unwrap().holds);
    }
}
