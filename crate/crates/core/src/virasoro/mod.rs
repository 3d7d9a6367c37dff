//! Virasoro action on the rank-two Jordan-cell highest-weight module.
//!
//! The module is built over dual rationals: `L₀|Δ+θ⟩ = (Δ+θ)|Δ+θ⟩` and
//! `Lₙ|Δ+θ⟩ = 0` for `n > 0`. Expanding a coefficient into its θ⁰ and θ¹
//! parts recovers the pair `|Φ⟩`, `|Ψ⟩` with `L₀|Ψ⟩ = Δ|Ψ⟩ + |Φ⟩`.

mod null;
mod partition;
mod quotient;
mod state;

pub use null::{
    beta_operator, check_vanishing, coefficients_to_f64, drift_operator, drift_state, null_vector_level2,
    sle_coefficients, Coefficients, NullVector, Vanishing,
};
pub use partition::Partition;
pub use quotient::{quotient_project, NullQuotient};
pub use state::{act, ModuleContext, ModuleState};

#[cfg(test)]
mod tests {
    use num_traits::Zero;
    use proptest::prelude::*;

    use super::*;
    use crate::dual::Dual;
    use crate::scalar::Scalar;
    use crate::{DualQ, Rational};

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_ratio(p, d)
    }

    fn dq(b: (i64, i64), s: (i64, i64)) -> DualQ {
        Dual::new(q(b.0, b.1), q(s.0, s.1))
    }

    fn ctx(delta: Rational, c: DualQ) -> ModuleContext<Rational> {
        ModuleContext::new(delta, c)
    }

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec())
    }

    #[test]
    fn l0_on_highest_weight() {
        let cx = ctx(q(1, 4), DualQ::from_i64(1));
        let hw = ModuleState::highest_weight(cx.clone());
        let out = act(0, &hw);
        assert_eq!(out, hw.scale(&dq((1, 4), (1, 1))));
        assert!(act(1, &hw).is_zero());
        assert!(act(5, &hw).is_zero());
    }

    #[test]
    fn l1_lowers_l_minus_one() {
        let cx = ctx(q(3, 7), dq((2, 1), (-1, 3)));
        let v = ModuleState::basis(cx.clone(), p(&[1]));
        let expected = ModuleState::highest_weight(cx.clone()).scale(&cx.weight().scale(&q(2, 1)));
        assert_eq!(act(1, &v), expected);
    }

    #[test]
    fn central_term_appears_in_l2_l_minus_two() {
        // L₂L₋₂|h⟩ = (4(Δ+θ) + c/2)|h⟩
        let c = dq((5, 1), (2, 1));
        let cx = ctx(q(1, 3), c.clone());
        let v = ModuleState::basis(cx.clone(), p(&[2]));
        let coeff = cx.weight().scale(&q(4, 1)) + c.scale(&q(1, 2));
        assert_eq!(act(2, &v), ModuleState::highest_weight(cx).scale(&coeff));
    }

    #[test]
    fn straightening_reorders_words() {
        // L₋₁L₋₂|h⟩ = L₋₂L₋₁|h⟩ + L₋₃|h⟩
        let cx = ctx(q(0, 1), DualQ::zero());
        let v = ModuleState::basis(cx.clone(), p(&[2]));
        let expected = ModuleState::from_terms(cx, [(p(&[2, 1]), DualQ::from_i64(1)), (p(&[3]), DualQ::from_i64(1))]);
        assert_eq!(act(-1, &v), expected);
    }

    #[test]
    fn null_vector_at_quarter() {
        let nv = null_vector_level2(&q(1, 4)).unwrap();
        assert_eq!(nv.gamma, dq((2, 1), (-8, 3)));
        assert_eq!(nv.central, dq((1, 1), (0, 1)));
        assert_eq!(nv.kappa(), dq((4, 1), (-16, 3)));
        assert!(nv.is_logarithmic());
        assert_eq!(nv.chi.coefficient(&p(&[2])), DualQ::from_i64(-2));
        assert_eq!(nv.chi.coefficient(&p(&[1, 1])), nv.gamma);
    }

    #[test]
    fn null_vector_at_minus_five_quarters() {
        let nv = null_vector_level2(&q(-5, 4)).unwrap();
        assert_eq!(nv.central, dq((25, 1), (0, 1)));
        assert_eq!(nv.gamma, dq((-2, 1), (-8, 3)));
    }

    #[test]
    fn null_vector_at_ising_weight() {
        let nv = null_vector_level2(&q(1, 2)).unwrap();
        assert_eq!(nv.gamma.body, q(3, 2));
        assert_eq!(nv.central, dq((1, 2), (-7, 2)));
        assert!(!nv.is_logarithmic());
    }

    #[test]
    fn gamma_pole() {
        assert_eq!(null_vector_level2(&q(-1, 2)).unwrap_err(), crate::Error::GammaPole);
    }

    #[test]
    fn vanishing_on_locus() {
        let nv = null_vector_level2(&q(1, 4)).unwrap();
        let v = check_vanishing(&nv.chi);
        assert!(v.is_null);
        assert!(v.residual1.is_zero() && v.residual2.is_zero());
    }

    #[test]
    fn vanishing_fails_with_theta_free_central_charge() {
        let nv = null_vector_level2(&q(1, 2)).unwrap();
        let forced = ctx(q(1, 2), DualQ::constant(q(1, 2)));
        let chi = nv.chi.with_context(forced.clone());
        let v = check_vanishing(&chi);
        assert!(!v.is_null);
        assert!(v.residual1.is_zero());
        let expected = ModuleState::highest_weight(forced).scale(&dq((0, 1), (-7, 2)));
        assert_eq!(v.residual2, expected);
    }

    #[test]
    fn vanishing_of_zero_state() {
        let v = check_vanishing(&ModuleState::zero(ctx(q(1, 4), DualQ::from_i64(1))));
        assert!(v.is_null);
        assert!(v.residual1.is_zero() && v.residual2.is_zero());
    }

    #[test]
    fn drift_state_equals_chi_on_sle4() {
        let nv = null_vector_level2(&q(1, 4)).unwrap();
        let sqrt_k = nv.kappa().sqrt_exact().unwrap();
        assert_eq!(sqrt_k, dq((2, 1), (-4, 3)));
        let (a, b) = sle_coefficients(sqrt_k);
        let cx = ctx(q(1, 4), DualQ::from_i64(1));
        assert_eq!(drift_state(&a, &b, &cx), nv.chi);
    }

    #[test]
    fn drift_state_of_empty_walk() {
        let cx = ctx(q(1, 4), DualQ::from_i64(1));
        assert!(drift_state(&Coefficients::new(), &Coefficients::new(), &cx).is_zero());
    }

    #[test]
    fn drift_state_off_locus_is_not_proportional_to_chi() {
        let cx = ModuleContext::new(0.25_f64, Dual::new(1.0, 0.0));
        let (a, b) = sle_coefficients(Dual::new(3.0_f64.sqrt(), 0.0));
        let drift = drift_state(&a, &b, &cx);
        let l2 = drift.coefficient(&p(&[2]));
        let l11 = drift.coefficient(&p(&[1, 1]));
        assert_eq!(l2, Dual::new(-2.0, 0.0));
        assert!((l11.body - 1.5).abs() < 1e-12 && l11.slope.abs() < 1e-12);
        // χ has ratio γ/(−2) = −1 in the bulk; the drift has −3/4.
        let nv = null_vector_level2(&0.25_f64).unwrap();
        let chi_ratio = nv.chi.coefficient(&p(&[1, 1])).body / nv.chi.coefficient(&p(&[2])).body;
        assert!((l11.body / l2.body - chi_ratio).abs() > 0.2);
    }

    #[test]
    fn quotient_examples() {
        let nv = null_vector_level2(&q(1, 4)).unwrap();
        let cx = nv.chi.context().clone();
        assert!(quotient_project(&nv.chi, &nv.chi, 4).unwrap().is_zero());
        let hw = ModuleState::highest_weight(cx.clone());
        assert_eq!(quotient_project(&hw, &nv.chi, 4).unwrap(), hw);
        let l2 = ModuleState::basis(cx.clone(), p(&[2]));
        let expected = ModuleState::basis(cx, p(&[1, 1])).scale(&nv.gamma.scale(&q(1, 2)));
        assert_eq!(quotient_project(&l2, &nv.chi, 4).unwrap(), expected);
        assert_eq!(expected.coefficient(&p(&[1, 1])), dq((1, 1), (-4, 3)));
    }

    #[test]
    fn quotient_rejects_non_null() {
        let nv = null_vector_level2(&q(1, 2)).unwrap();
        let chi = nv.chi.with_context(ctx(q(1, 2), DualQ::constant(q(1, 2))));
        let err = quotient_project(&chi, &chi, 4).unwrap_err();
        assert_eq!(err, crate::Error::NotNullVector);
    }

    #[test]
    fn quotient_rejects_states_above_cutoff() {
        let nv = null_vector_level2(&q(1, 4)).unwrap();
        let s = ModuleState::basis(nv.chi.context().clone(), p(&[5]));
        assert!(matches!(
            quotient_project(&s, &nv.chi, 4),
            Err(crate::Error::LevelAboveCutoff { level: 5, cutoff: 4 })
        ));
    }

    #[test]
    fn quotient_kills_descendants_of_chi() {
        let nv = null_vector_level2(&q(-5, 4)).unwrap();
        let quotient = NullQuotient::new(&nv.chi, 6).unwrap();
        for lambda in Partition::up_to_level(4) {
            let desc = nv.chi.raise(&lambda);
            assert!(quotient.project(&desc).unwrap().is_zero(), "L_-{lambda:?} chi");
        }
        // one eliminated direction per partition of level − 2
        assert_eq!(quotient.eliminated().count(), 1 + 1 + 2 + 3 + 5);
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-6i64..=6, 1i64..=5).prop_map(|(a, b)| q(a, b))
    }

    fn small_dual() -> impl Strategy<Value = DualQ> {
        (small_rational(), small_rational()).prop_map(|(a, b)| Dual::new(a, b))
    }

    fn random_state(cx: ModuleContext<Rational>, max_level: u32) -> impl Strategy<Value = ModuleState<Rational>> {
        let basis = Partition::up_to_level(max_level);
        let n = basis.len();
        proptest::collection::vec((0..n, small_dual()), 1..5).prop_map(move |terms| {
            ModuleState::from_terms(cx.clone(), terms.into_iter().map(|(i, c)| (basis[i].clone(), c)))
        })
    }

    fn random_ctx() -> impl Strategy<Value = ModuleContext<Rational>> {
        (small_rational(), small_dual()).prop_map(|(d, c)| ModuleContext::new(d, c))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn commutator_consistency(
            (cx, s) in random_ctx().prop_flat_map(|cx| (Just(cx.clone()), random_state(cx, 6))),
            m in -4i32..=4,
            n in -4i32..=4,
        ) {
            let lhs = s.act(n).act(m).sub(&s.act(m).act(n));
            let mut rhs = s.act(m + n).scale(&DualQ::from_i64((m - n) as i64));
            if m + n == 0 {
                let m = m as i64;
                let k = cx.central.scale(&q(m * (m * m - 1), 12));
                rhs = rhs.add(&s.scale(&k));
            }
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn action_shifts_level(
            level in 0u32..=5,
            idx in 0usize..7,
            n in -3i32..=3,
            cx in random_ctx(),
        ) {
            let basis = Partition::of_level(level);
            let label = basis[idx % basis.len()].clone();
            let out = ModuleState::basis(cx, label).act(n);
            if let Some(l) = out.homogeneous_level() {
                prop_assert_eq!(l as i64, level as i64 - n as i64);
            } else {
                prop_assert!(out.is_zero());
            }
        }

        #[test]
        fn null_vector_vanishes_for_every_weight(num in -40i64..=40, den in 1i64..=12) {
            prop_assume!(den != -2 * num);
            let nv = null_vector_level2(&q(num, den)).unwrap();
            prop_assert!(check_vanishing(&nv.chi).is_null);
            let on_locus = q(num, den) == q(1, 4) || q(num, den) == q(-5, 4);
            prop_assert_eq!(nv.central.slope.is_zero(), on_locus);
        }

        #[test]
        fn drift_state_matches_chi_on_square_locus(s_num in 1i64..=6, s_den in 1i64..=6) {
            // κ = s² and 2Δ + 1 = 6/κ
            let kappa = q(s_num * s_num, s_den * s_den);
            let delta = (q(6, 1) / kappa - q(1, 1)) / q(2, 1);
            let nv = null_vector_level2(&delta).unwrap();
            prop_assert_eq!(nv.kappa().body, q(s_num * s_num, s_den * s_den));
            let (a, b) = sle_coefficients(nv.kappa().sqrt_exact().unwrap());
            let cx = nv.chi.context().clone();
            prop_assert_eq!(drift_state(&a, &b, &cx), nv.chi);
        }

        #[test]
        fn quotient_is_idempotent_and_linear(
            x in random_state(ModuleContext::new(q(1, 4), DualQ::from_i64(1)), 4),
            y in random_state(ModuleContext::new(q(1, 4), DualQ::from_i64(1)), 4),
            k in small_dual(),
        ) {
            let nv = null_vector_level2(&q(1, 4)).unwrap();
            let quotient = NullQuotient::new(&nv.chi, 4).unwrap();
            let px = quotient.project(&x).unwrap();
            prop_assert_eq!(quotient.project(&px).unwrap(), px.clone());
            let py = quotient.project(&y).unwrap();
            let combo = x.add(&y.scale(&k));
            prop_assert_eq!(quotient.project(&combo).unwrap(), px.add(&py.scale(&k)));
        }
    }
}
