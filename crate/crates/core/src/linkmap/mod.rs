//! Drift and diffusion of the τ-dependent conformal map `f_t(z, τ)` induced
//! by a walk `G⁻¹dG = α dt + β dB` on the Virasoro group.
//!
//! With `α₀ = α − ½β² = Σ aₙLₙ` and `β = Σ bₙLₙ`, the map obeys
//! `df = μ(f) dt + ν(f) dB` where
//!
//! ```text
//! ν(f) = −Σ bₙ fⁿ⁺¹,    μ(f) = −Σ aₙ fⁿ⁺¹ + ½ ν ∂_f ν.
//! ```
//!
//! The SLE-type walk has `a = {−2: −2}` and `b = {−1: √k(τ)}`.

mod laurent;

pub use laurent::LaurentPoly;

use crate::dual::Dual;
use crate::error::Result;
use crate::scalar::Scalar;
use crate::virasoro::Coefficients;

pub fn compute_nu<T: Scalar>(b: &Coefficients<T>) -> LaurentPoly<T> {
    -LaurentPoly::from_terms(b.iter().map(|(&n, bn)| (n + 1, bn.clone())))
}

pub fn compute_mu<T: Scalar>(a: &Coefficients<T>, b: &Coefficients<T>) -> LaurentPoly<T> {
    let nu = compute_nu(b);
    let correction = (&nu * &nu.derivative()).scale(&Dual::from_ratio(1, 2));
    -LaurentPoly::from_terms(a.iter().map(|(&n, an)| (n + 1, an.clone()))) + correction
}

/// `p(h + τĥ) = bulk(h) + τ (hat_free(h) + ĥ · hat_linear(h))`.
///
/// `hat_free` collects the θ¹ parts of the coefficients; `hat_linear` is
/// `∂_h` of the bulk. All three polynomials have θ-free coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TauExpansion<T> {
    pub bulk: LaurentPoly<T>,
    pub hat_free: LaurentPoly<T>,
    pub hat_linear: LaurentPoly<T>,
}

impl<T: Scalar> TauExpansion<T> {
    /// `(bulk(h), hat_free(h) + ĥ · hat_linear(h))`.
    pub fn evaluate(&self, h: &T, h_hat: &T) -> Result<(T, T)> {
        let at = Dual::constant(h.clone());
        let bulk = self.bulk.evaluate(&at)?.body;
        let free = self.hat_free.evaluate(&at)?.body;
        let linear = self.hat_linear.evaluate(&at)?.body;
        Ok((bulk, free + linear * h_hat.clone()))
    }
}

pub fn expand_tau<T: Scalar>(p: &LaurentPoly<T>) -> TauExpansion<T> {
    let bulk = p.bulk();
    TauExpansion { hat_free: p.slope(), hat_linear: bulk.derivative(), bulk }
}

#[cfg(test)]
mod tests {
    use num_traits::Zero;
    use proptest::prelude::*;

    use super::*;
    use crate::{DualQ, Rational};

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_ratio(p, d)
    }

    fn dq(b: (i64, i64), s: (i64, i64)) -> DualQ {
        Dual::new(q(b.0, b.1), q(s.0, s.1))
    }

    fn sqrt_k() -> DualQ {
        dq((4, 1), (-16, 3)).sqrt_exact().unwrap()
    }

    #[test]
    fn nu_examples() {
        let b = Coefficients::from([(-1, sqrt_k())]);
        assert_eq!(compute_nu(&b), LaurentPoly::constant(-sqrt_k()));
        assert!(compute_nu::<Rational>(&Coefficients::new()).is_zero());
        let b = Coefficients::from([(1, DualQ::from_i64(1))]);
        assert_eq!(compute_nu(&b), LaurentPoly::monomial(2, DualQ::from_i64(-1)));
    }

    #[test]
    fn mu_examples() {
        let a = Coefficients::from([(-2, DualQ::from_i64(-2))]);
        let b = Coefficients::from([(-1, sqrt_k())]);
        assert_eq!(compute_mu(&a, &b), LaurentPoly::monomial(-1, DualQ::from_i64(2)));
        assert!(compute_mu::<Rational>(&Coefficients::new(), &Coefficients::new()).is_zero());
        let one = Coefficients::from([(0, DualQ::from_i64(1))]);
        assert_eq!(compute_mu(&one, &one), LaurentPoly::monomial(1, dq((-1, 2), (0, 1))));
    }

    #[test]
    fn tau_expansion_of_drift() {
        let e = expand_tau(&LaurentPoly::monomial(-1, DualQ::from_i64(2)));
        assert_eq!(e.bulk, LaurentPoly::monomial(-1, DualQ::from_i64(2)));
        assert!(e.hat_free.is_zero());
        assert_eq!(e.hat_linear, LaurentPoly::monomial(-2, DualQ::from_i64(-2)));
    }

    #[test]
    fn tau_expansion_of_diffusion() {
        let e = expand_tau(&LaurentPoly::constant(-sqrt_k()));
        assert_eq!(e.bulk, LaurentPoly::constant(DualQ::from_i64(-2)));
        // −κ̂/(2√κ) = (16/3)/4
        assert_eq!(e.hat_free, LaurentPoly::constant(dq((4, 3), (0, 1))));
        assert!(e.hat_linear.is_zero());
    }

    #[test]
    fn tau_expansion_of_constant() {
        let e = expand_tau(&LaurentPoly::constant(DualQ::from_i64(1)));
        assert_eq!(e.bulk, LaurentPoly::constant(DualQ::from_i64(1)));
        assert!(e.hat_free.is_zero() && e.hat_linear.is_zero());
    }

    #[test]
    fn expansion_agrees_with_dual_evaluation() {
        let p = LaurentPoly::from_terms([(-2, dq((3, 1), (1, 2))), (1, dq((-1, 4), (2, 1))), (3, dq((1, 1), (0, 1)))]);
        let (h, h_hat) = (q(5, 3), q(-7, 2));
        let direct = p.evaluate(&Dual::new(h.clone(), h_hat.clone())).unwrap();
        let (bulk, hat) = expand_tau(&p).evaluate(&h, &h_hat).unwrap();
        assert_eq!(direct, Dual::new(bulk, hat));
    }

    fn coeffs() -> impl Strategy<Value = Coefficients<Rational>> {
        proptest::collection::btree_map(-3i32..=3, ((-9i64..=9), (1i64..=5), (-9i64..=9)), 0..4)
            .prop_map(|m| m.into_iter().map(|(n, (a, d, s))| (n, Dual::new(q(a, d), q(s, d)))).collect())
    }

    fn poly() -> impl Strategy<Value = LaurentPoly<Rational>> {
        coeffs().prop_map(LaurentPoly::from_terms)
    }

    fn add_coeffs(x: &Coefficients<Rational>, y: &Coefficients<Rational>, k: &DualQ) -> Coefficients<Rational> {
        let mut out = x.clone();
        for (&n, c) in y {
            let sum = out.get(&n).cloned().unwrap_or_else(DualQ::zero) + c * k;
            out.insert(n, sum);
        }
        out
    }

    proptest! {
        #[test]
        fn nu_and_mu_are_linear(a1 in coeffs(), a2 in coeffs(), b in coeffs(), b2 in coeffs(), k in (-5i64..=5, -5i64..=5)) {
            let k = dq((k.0, 1), (k.1, 1));
            let a = add_coeffs(&a1, &a2, &k);
            let nu_sum = compute_nu(&add_coeffs(&b, &b2, &k));
            prop_assert_eq!(nu_sum, compute_nu(&b) + compute_nu(&b2).scale(&k));
            // for fixed ν, μ is affine-linear in a
            let mu = compute_mu(&a, &b);
            let expected = compute_mu(&a1, &b) + compute_mu(&a2, &b).scale(&k) - compute_mu(&Coefficients::new(), &b).scale(&k);
            prop_assert_eq!(mu, expected);
        }

        #[test]
        fn expansion_product_rule(p in poly(), r in poly()) {
            let (ep, er, epr) = (expand_tau(&p), expand_tau(&r), expand_tau(&(&p * &r)));
            prop_assert_eq!(&epr.bulk, &(&ep.bulk * &er.bulk));
            prop_assert_eq!(&epr.hat_free, &(&ep.bulk * &er.hat_free + &ep.hat_free * &er.bulk));
            prop_assert_eq!(&epr.hat_linear, &(&ep.bulk * &er.hat_linear + &ep.hat_linear * &er.bulk));
        }
    }
}
