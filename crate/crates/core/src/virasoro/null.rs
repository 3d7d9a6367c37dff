use std::collections::BTreeMap;

use num_traits::Zero;

use super::partition::Partition;
use super::state::{ModuleContext, ModuleState};
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Finitely supported coefficients `{n ↦ cₙ}` of a generator combination `Σ cₙ Lₙ`.
pub type Coefficients<T> = BTreeMap<i32, Dual<T>>;

/// The level-two logarithmic null vector data for a weight `Δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct NullVector<T> {
    /// `γ = 3 / (2Δ + 1 + 2θ)`.
    pub gamma: Dual<T>,
    /// `c = (6γ − 8)(Δ + θ)`.
    pub central: Dual<T>,
    /// `χ = (−2L₋₂ + γL₋₁²)|Δ+θ⟩` in the module with central charge `central`.
    pub chi: ModuleState<T>,
}

impl<T: Scalar> NullVector<T> {
    /// A logarithmic null vector exists with θ-free `(c, Δ)` exactly when the
    /// θ-slope of the central charge vanishes.
    pub fn is_logarithmic(&self) -> bool {
        self.central.slope.is_zero()
    }

    /// `k(θ) = 6 / (2(Δ+θ) + 1) = 2γ`, the diffusivity making the SLE drift
    /// state equal to `χ`.
    pub fn kappa(&self) -> Dual<T> {
        self.gamma.scale(&T::from_i64(2))
    }
}

pub fn null_vector_level2<T: Scalar>(delta: &T) -> Result<NullVector<T>> {
    let two = T::from_i64(2);
    let denom = Dual::new(two.clone() * delta.clone() + T::one(), two);
    if denom.body.is_zero() {
        return Err(Error::GammaPole);
    }
    let gamma = denom.inv()?.scale(&T::from_i64(3));
    let weight = Dual::new(delta.clone(), T::one());
    let central = (gamma.scale(&T::from_i64(6)) - Dual::from_i64(8)) * weight;
    let ctx = ModuleContext::new(delta.clone(), central.clone());
    let chi = ModuleState::from_terms(
        ctx,
        [(Partition::new(vec![2]), Dual::from_i64(-2)), (Partition::new(vec![1, 1]), gamma.clone())],
    );
    Ok(NullVector { gamma, central, chi })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vanishing<T> {
    pub residual1: ModuleState<T>,
    pub residual2: ModuleState<T>,
    pub is_null: bool,
}

/// Evaluates `L₁χ` and `L₂χ`; `is_null` iff both vanish identically in both
/// θ-components.
pub fn check_vanishing<T: Scalar>(chi: &ModuleState<T>) -> Vanishing<T> {
    let residual1 = chi.act(1);
    let residual2 = chi.act(2);
    let is_null = residual1.is_zero() && residual2.is_zero();
    Vanishing { residual1, residual2, is_null }
}

/// `(α₀ + ½β²) · state` with `α₀ = Σ aₙLₙ`, `β = Σ bₙLₙ`.
pub fn drift_operator<T: Scalar>(a: &Coefficients<T>, b: &Coefficients<T>, state: &ModuleState<T>) -> ModuleState<T> {
    let mut out = ModuleState::zero(state.context().clone());
    for (&n, an) in a {
        out = out.add(&state.act(n).scale(an));
    }
    let beta = beta_operator(b, state);
    let half = Dual::from_ratio(1, 2);
    out.add(&beta_operator(b, &beta).scale(&half))
}

/// `β · state`.
pub fn beta_operator<T: Scalar>(b: &Coefficients<T>, state: &ModuleState<T>) -> ModuleState<T> {
    let mut out = ModuleState::zero(state.context().clone());
    for (&n, bn) in b {
        out = out.add(&state.act(n).scale(bn));
    }
    out
}

/// `(α₀ + ½β²)|Δ+θ⟩`, the drift of `E[G_t|Δ+θ⟩]` at `t = 0`.
pub fn drift_state<T: Scalar>(a: &Coefficients<T>, b: &Coefficients<T>, ctx: &ModuleContext<T>) -> ModuleState<T> {
    drift_operator(a, b, &ModuleState::highest_weight(ctx.clone()))
}

/// Coefficients `a = {−2: −2}`, `b = {−1: √k}` of the SLE-type walk
/// `G⁻¹dG = (−2L₋₂ + (k/2)L₋₁²)dt + √k L₋₁ dB`.
pub fn sle_coefficients<T: Scalar>(sqrt_k: Dual<T>) -> (Coefficients<T>, Coefficients<T>) {
    let a = Coefficients::from([(-2, Dual::from_i64(-2))]);
    let b = if sqrt_k.is_zero() { Coefficients::new() } else { Coefficients::from([(-1, sqrt_k)]) };
    (a, b)
}

pub fn coefficients_to_f64(c: &Coefficients<num_rational::BigRational>) -> Coefficients<f64> {
    c.iter().map(|(&n, v)| (n, v.to_f64())).collect()
}
