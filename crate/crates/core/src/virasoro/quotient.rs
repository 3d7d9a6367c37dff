use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::null::check_vanishing;
use super::partition::Partition;
use super::state::{ModuleContext, ModuleState};
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative pivot threshold for floating fields.
const FLOAT_PIVOT_TOL: f64 = 1e-10;

/// Reduction data for the quotient by the submodule generated by a level-two
/// null vector `χ`, truncated at a level cutoff.
///
/// At each level `ℓ` the vectors `L₋λχ` (`|λ| = ℓ − 2`) are brought to reduced
/// echelon form over the dual numbers. Columns are scanned from the
/// lexicographically largest partition down, and a column becomes a pivot as
/// soon as some remaining row has an invertible (nonzero-body) entry there.
/// Projection subtracts pivot rows until every pivot coordinate vanishes,
/// which yields a canonical representative of the quotient class.
#[derive(Clone, Debug)]
pub struct NullQuotient<T> {
    chi: ModuleState<T>,
    cutoff: u32,
    pivots: BTreeMap<u32, Vec<(Partition, ModuleState<T>)>>,
}

impl<T: Scalar> NullQuotient<T> {
    pub fn new(chi: &ModuleState<T>, cutoff: u32) -> Result<Self> {
        if !chi.is_zero() && chi.homogeneous_level() != Some(2) {
            return Err(Error::NotHomogeneous(2));
        }
        if !check_vanishing(chi).is_null {
            return Err(Error::NotNullVector);
        }
        let mut pivots = BTreeMap::new();
        for level in 2..=cutoff {
            let rows: Vec<ModuleState<T>> = Partition::of_level(level - 2)
                .iter()
                .map(|lambda| chi.raise(lambda))
                .filter(|s| !s.is_zero())
                .collect();
            pivots.insert(level, reduce_level(rows, level)?);
        }
        Ok(NullQuotient { chi: chi.clone(), cutoff, pivots })
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Partitions eliminated at each level.
    pub fn eliminated(&self) -> impl Iterator<Item = &Partition> {
        self.pivots.values().flatten().map(|(p, _)| p)
    }

    pub fn project(&self, state: &ModuleState<T>) -> Result<ModuleState<T>> {
        if !contexts_compatible(state.context(), self.chi.context()) {
            return Err(Error::ContextMismatch);
        }
        if let Some(level) = state.max_level() {
            if level > self.cutoff {
                return Err(Error::LevelAboveCutoff { level, cutoff: self.cutoff });
            }
        }
        let mut out = state.clone();
        for rows in self.pivots.values() {
            for (pivot, row) in rows {
                let coeff = out.coefficient(pivot);
                if !coeff.is_zero() {
                    out = out.sub(&row.with_context(out.context().clone()).scale(&coeff));
                }
            }
        }
        Ok(out)
    }
}

fn reduce_level<T: Scalar>(mut rows: Vec<ModuleState<T>>, level: u32) -> Result<Vec<(Partition, ModuleState<T>)>> {
    let mut reduced: Vec<(Partition, ModuleState<T>)> = Vec::new();
    for column in Partition::of_level(level) {
        if rows.is_empty() {
            break;
        }
        let Some(idx) = choose_pivot(&rows, &column) else {
            continue;
        };
        let row = rows.swap_remove(idx);
        let inv = row.coefficient(&column).inv()?;
        let mut row = row.scale(&inv);
        // Pin the pivot entry to exactly one in float mode.
        let residue = row.coefficient(&column) - Dual::one();
        row.add_term(column.clone(), -residue);
        let eliminate = |other: &ModuleState<T>| {
            let c = other.coefficient(&column);
            if c.is_zero() {
                return other.clone();
            }
            let mut out = other.sub(&row.scale(&c));
            let leftover = out.coefficient(&column);
            out.add_term(column.clone(), -leftover);
            out
        };
        rows = rows.iter().map(&eliminate).filter(|s| !negligible(s)).collect();
        for (_, r) in reduced.iter_mut() {
            *r = eliminate(r);
        }
        reduced.push((column, row));
    }
    if !rows.is_empty() {
        return Err(Error::InvalidParam(format!("null submodule at level {level} is not free over the dual numbers")));
    }
    Ok(reduced)
}

fn choose_pivot<T: Scalar>(rows: &[ModuleState<T>], column: &Partition) -> Option<usize> {
    if T::EXACT {
        return rows.iter().position(|r| !r.coefficient(column).body.is_zero());
    }
    let (idx, best) = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r.coefficient(column).body.magnitude() / row_scale(r)))
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    (best > FLOAT_PIVOT_TOL).then_some(idx)
}

fn row_scale<T: Scalar>(row: &ModuleState<T>) -> f64 {
    row.terms().values().map(|c| c.body.magnitude()).fold(0.0, f64::max).max(f64::MIN_POSITIVE)
}

fn negligible<T: Scalar>(row: &ModuleState<T>) -> bool {
    if T::EXACT {
        return row.is_zero();
    }
    row.terms().values().all(|c| c.body.magnitude() < FLOAT_PIVOT_TOL && c.slope.magnitude() < FLOAT_PIVOT_TOL)
}

fn contexts_compatible<T: Scalar>(a: &ModuleContext<T>, b: &ModuleContext<T>) -> bool {
    if T::EXACT {
        return a == b;
    }
    let close = |x: &T, y: &T| (x.clone() - y.clone()).magnitude() <= 1e-9 * (1.0 + x.magnitude());
    close(&a.delta, &b.delta) && close(&a.central.body, &b.central.body) && close(&a.central.slope, &b.central.slope)
}

/// Canonical representative of `state` modulo the submodule generated by `chi`,
/// up to `level_cutoff`.
pub fn quotient_project<T: Scalar>(
    state: &ModuleState<T>,
    chi: &ModuleState<T>,
    level_cutoff: u32,
) -> Result<ModuleState<T>> {
    NullQuotient::new(chi, level_cutoff)?.project(state)
}
