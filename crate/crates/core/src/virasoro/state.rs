use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use super::partition::Partition;
use crate::dual::Dual;
use crate::scalar::Scalar;

/// Conformal weight `Δ` (θ-free) and central charge `c` (possibly θ-dependent).
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleContext<T> {
    pub delta: T,
    pub central: Dual<T>,
}

impl<T: Scalar> ModuleContext<T> {
    pub fn new(delta: T, central: Dual<T>) -> Self {
        ModuleContext { delta, central }
    }

    /// The generalized `L₀` eigenvalue `Δ + θ` of the highest-weight state.
    pub fn weight(&self) -> Dual<T> {
        Dual::new(self.delta.clone(), T::one())
    }
}

impl ModuleContext<num_rational::BigRational> {
    pub fn to_f64(&self) -> ModuleContext<f64> {
        use num_traits::ToPrimitive;
        ModuleContext::new(self.delta.to_f64().unwrap_or(f64::NAN), self.central.to_f64())
    }
}

pub(crate) type Terms<T> = BTreeMap<Partition, Dual<T>>;

/// A finite combination of descendants `L₋λ|Δ+θ⟩` with dual coefficients.
///
/// The θ⁰ parts of the coefficients form the `|Φ⟩` sector and the θ¹ parts
/// the `|Ψ⟩` sector of the rank-two Jordan cell. Zero coefficients are never
/// stored, so equality is equality of module elements.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleState<T> {
    context: ModuleContext<T>,
    terms: Terms<T>,
}

impl<T: Scalar> ModuleState<T> {
    pub fn zero(context: ModuleContext<T>) -> Self {
        ModuleState { context, terms: BTreeMap::new() }
    }

    /// `|Δ+θ⟩`.
    pub fn highest_weight(context: ModuleContext<T>) -> Self {
        Self::basis(context, Partition::empty())
    }

    pub fn basis(context: ModuleContext<T>, label: Partition) -> Self {
        Self::from_terms(context, [(label, Dual::one())])
    }

    pub fn from_terms(context: ModuleContext<T>, terms: impl IntoIterator<Item = (Partition, Dual<T>)>) -> Self {
        let mut out = Self::zero(context);
        for (p, c) in terms {
            out.add_term(p, c);
        }
        out
    }

    pub fn context(&self) -> &ModuleContext<T> {
        &self.context
    }

    pub fn terms(&self) -> &BTreeMap<Partition, Dual<T>> {
        &self.terms
    }

    pub fn coefficient(&self, label: &Partition) -> Dual<T> {
        self.terms.get(label).cloned().unwrap_or_else(Dual::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, label: Partition, coeff: Dual<T>) {
        accumulate(&mut self.terms, label, coeff);
    }

    /// The maximum level over stored terms, `None` for the zero state.
    pub fn max_level(&self) -> Option<u32> {
        self.terms.keys().map(Partition::level).max()
    }

    /// The common level of all terms, if the state is homogeneous and nonzero.
    pub fn homogeneous_level(&self) -> Option<u32> {
        let mut levels = self.terms.keys().map(Partition::level);
        let first = levels.next()?;
        levels.all(|l| l == first).then_some(first)
    }

    /// Components of level exactly `level`.
    pub fn level_part(&self, level: u32) -> Self {
        self.filter_terms(|p| p.level() == level)
    }

    /// Drops every component above `cutoff`.
    pub fn truncate(&self, cutoff: u32) -> Self {
        self.filter_terms(|p| p.level() <= cutoff)
    }

    fn filter_terms(&self, keep: impl Fn(&Partition) -> bool) -> Self {
        ModuleState {
            context: self.context.clone(),
            terms: self.terms.iter().filter(|(p, _)| keep(p)).map(|(p, c)| (p.clone(), c.clone())).collect(),
        }
    }

    pub fn scale(&self, k: &Dual<T>) -> Self {
        Self::from_terms(self.context.clone(), self.terms.iter().map(|(p, c)| (p.clone(), c * k)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(p.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(p.clone(), -c.clone());
        }
        out
    }

    /// Same terms, different context. Used to pin the central charge.
    pub fn with_context(&self, context: ModuleContext<T>) -> Self {
        ModuleState { context, terms: self.terms.clone() }
    }

    /// `Lₙ · self`.
    pub fn act(&self, n: i32) -> Self {
        act(n, self)
    }

    /// `L₋λ · self` for a partition λ, i.e. `L₋λ₁(⋯(L₋λₖ · self))`.
    pub fn raise(&self, label: &Partition) -> Self {
        let mut out = self.clone();
        for &part in label.parts().iter().rev() {
            out = out.act(-(part as i32));
        }
        out
    }
}

pub(crate) fn accumulate<T: Scalar>(terms: &mut Terms<T>, label: Partition, coeff: Dual<T>) {
    if coeff.is_zero() {
        return;
    }
    match terms.entry(label) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(coeff);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let sum = e.get().clone() + coeff;
            if sum.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

/// `Lₙ · state`.
///
/// Each word `L₋λ₁ ⋯ L₋λₖ|Δ+θ⟩` is straightened into PBW order by commuting
/// `Lₙ` to the right with `[Lₘ, Lₙ] = (m−n)Lₘ₊ₙ + (c/12)m(m²−1)δₘ₊ₙ,₀`, then
/// `L₀|Δ+θ⟩ = (Δ+θ)|Δ+θ⟩` and `Lₙ|Δ+θ⟩ = 0` for `n > 0`.
pub fn act<T: Scalar>(n: i32, state: &ModuleState<T>) -> ModuleState<T> {
    let mut straightener = Straightener::new(&state.context);
    let mut out = Terms::new();
    for (label, coeff) in &state.terms {
        for (p, c) in straightener.apply(n, label.parts()).iter() {
            accumulate(&mut out, p.clone(), c * coeff);
        }
    }
    ModuleState { context: state.context.clone(), terms: out }
}

struct Straightener<'a, T> {
    ctx: &'a ModuleContext<T>,
    cache: HashMap<(i32, Vec<u32>), Terms<T>>,
}

impl<'a, T: Scalar> Straightener<'a, T> {
    fn new(ctx: &'a ModuleContext<T>) -> Self {
        Straightener { ctx, cache: HashMap::new() }
    }

    fn apply(&mut self, n: i32, parts: &[u32]) -> Terms<T> {
        let key = (n, parts.to_vec());
        if let Some(hit) = self.cache.get(&key) {
            return hit.clone();
        }
        let result = self.apply_uncached(n, parts);
        self.cache.insert(key, result.clone());
        result
    }

    fn apply_uncached(&mut self, n: i32, parts: &[u32]) -> Terms<T> {
        let mut out = Terms::new();
        let Some((&first, rest)) = parts.split_first() else {
            match n {
                n if n > 0 => {}
                0 => accumulate(&mut out, Partition::empty(), self.ctx.weight()),
                _ => accumulate(&mut out, Partition::from_sorted(vec![(-n) as u32]), Dual::one()),
            }
            return out;
        };
        if n < 0 && (-n) as u32 >= first {
            let mut raised = Vec::with_capacity(parts.len() + 1);
            raised.push((-n) as u32);
            raised.extend_from_slice(parts);
            accumulate(&mut out, Partition::from_sorted(raised), Dual::one());
            return out;
        }
        let m = -(first as i32);
        // Lₙ Lₘ W = Lₘ (Lₙ W) + (n − m) Lₙ₊ₘ W + central term
        let inner = self.apply(n, rest);
        for (p, c) in &inner {
            for (q, d) in self.apply(m, p.parts()) {
                accumulate(&mut out, q, d * c.clone());
            }
        }
        let bracket = Dual::from_i64((n - m) as i64);
        if !bracket.is_zero() {
            for (q, d) in self.apply(n + m, rest) {
                accumulate(&mut out, q, d * bracket.clone());
            }
        }
        if n + m == 0 {
            let n = n as i64;
            let factor = self.ctx.central.scale(&T::from_ratio(n * (n * n - 1), 12));
            accumulate(&mut out, Partition::from_sorted(rest.to_vec()), factor);
        }
        out
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for ModuleState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (p, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{c}] {p}")?;
        }
        Ok(())
    }
}
