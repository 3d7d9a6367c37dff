use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use crate::dual::Dual;
use crate::error::Result;
use crate::scalar::Scalar;

/// A Laurent polynomial `Σ cₙ fⁿ` in one formal variable with dual coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LaurentPoly<T> {
    coeffs: BTreeMap<i32, Dual<T>>,
}

impl<T: Scalar> LaurentPoly<T> {
    pub fn zero() -> Self {
        LaurentPoly { coeffs: BTreeMap::new() }
    }

    pub fn constant(c: Dual<T>) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(exponent: i32, c: Dual<T>) -> Self {
        let mut p = Self::zero();
        p.add_term(exponent, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i32, Dual<T>)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exponent: i32, c: Dual<T>) {
        if c.is_zero() {
            return;
        }
        let sum = self.coeffs.remove(&exponent).map_or(c.clone(), |old| old + c);
        if !sum.is_zero() {
            self.coeffs.insert(exponent, sum);
        }
    }

    pub fn coefficient(&self, exponent: i32) -> Dual<T> {
        self.coeffs.get(&exponent).cloned().unwrap_or_else(Dual::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Dual<T>)> {
        self.coeffs.iter().map(|(&e, c)| (e, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, k: &Dual<T>) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(&e, c)| (e, c * k)))
    }

    /// Formal `∂_f`.
    pub fn derivative(&self) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(&e, c)| (e - 1, c.scale(&T::from_i64(e as i64)))))
    }

    /// θ⁰ parts of the coefficients.
    pub fn bulk(&self) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(&e, c)| (e, Dual::constant(c.body.clone()))))
    }

    /// θ¹ parts of the coefficients, as θ-free coefficients.
    pub fn slope(&self) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(&e, c)| (e, Dual::constant(c.slope.clone()))))
    }

    /// Evaluates at a dual point; negative exponents require an invertible point.
    pub fn evaluate(&self, x: &Dual<T>) -> Result<Dual<T>> {
        let mut acc = Dual::zero();
        for (&e, c) in &self.coeffs {
            acc += c * &x.powi(e)?;
        }
        Ok(acc)
    }
}

impl<T: Scalar> Add for LaurentPoly<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (e, c) in rhs.coeffs {
            self.add_term(e, c);
        }
        self
    }
}

impl<T: Scalar> Neg for LaurentPoly<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_terms(self.coeffs.into_iter().map(|(e, c)| (e, -c)))
    }
}

impl<T: Scalar> Sub for LaurentPoly<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Scalar> Mul for &LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn mul(self, rhs: &LaurentPoly<T>) -> LaurentPoly<T> {
        let mut out = LaurentPoly::zero();
        for (&e1, c1) in &self.coeffs {
            for (&e2, c2) in &rhs.coeffs {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl<T: Scalar> Mul for LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn mul(self, rhs: LaurentPoly<T>) -> LaurentPoly<T> {
        &self * &rhs
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for LaurentPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.coeffs.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let coeff = if c.slope.is_zero() { c.body.to_string() } else { format!("({c})") };
            match e {
                0 => write!(f, "{coeff}")?,
                1 => write!(f, "{coeff}·f")?,
                _ => write!(f, "{coeff}·f^{e}")?,
            }
        }
        Ok(())
    }
}
