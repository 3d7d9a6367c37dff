use num_traits::One;

use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::loewner::MapPointState;
use crate::scalar::{FloatScalar, Scalar};

/// Dual Itô drift coefficient `D = h·(k(2h+1) − 6)` of the map observable:
/// `d E[M] = E[M·D/f²] dt`.
pub fn drift_coefficient<T: Scalar>(h: &Dual<T>, k: &Dual<T>) -> Dual<T> {
    let two_h_plus_one = h.scale(&T::from_i64(2)) + Dual::one();
    h * &(k * &two_h_plus_one - Dual::from_i64(6))
}

/// `M = (f′)^{Δ+θ} f^{−2(Δ+θ)}` with `f = h + θĥ`, `f′ = ∂h + θ∂ĥ`.
pub fn observable_m<T: FloatScalar>(state: &MapPointState<T>, delta: f64) -> Result<Dual<T>> {
    observable_with_exponent(state, &Dual::new(T::from_f64(delta), T::one()))
}

/// `(f′)^e f^{−2e}` for an arbitrary dual exponent `e`.
pub fn observable_with_exponent<T: FloatScalar>(state: &MapPointState<T>, e: &Dual<T>) -> Result<Dual<T>> {
    if state.swallowed {
        return Err(Error::AbsorbedPoint);
    }
    evaluate(state, e)
}

/// Same as [`observable_with_exponent`] but also at a frozen state, which is
/// the value of the stopped process.
pub(crate) fn evaluate<T: FloatScalar>(state: &MapPointState<T>, e: &Dual<T>) -> Result<Dual<T>> {
    if state.h.on_branch_cut() {
        return Err(Error::Branch(format!("h = {:?}", state.h)));
    }
    let f = Dual::new(state.h, state.h_hat);
    let fp = Dual::new(state.dh_dz, state.dh_hat_dz);
    let minus_two = e.scale(&T::from_f64(-2.0));
    Ok(fp.powd(e)? * f.powd(&minus_two)?)
}
