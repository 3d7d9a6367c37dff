use std::fmt;

use serde::{Deserialize, Serialize};

/// A weakly decreasing sequence `λ₁ ≥ … ≥ λₖ ≥ 1`, labelling the descendant
/// `L₋λ₁ ⋯ L₋λₖ |Δ+θ⟩`. The empty partition labels the highest-weight state.
///
/// Ordering is lexicographic on the parts, so at a fixed level `[2] > [1, 1]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Sorts the parts into canonical order. Zero parts are rejected.
    pub fn new(mut parts: Vec<u32>) -> Self {
        assert!(parts.iter().all(|&p| p > 0), "partition parts must be positive");
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub(crate) fn from_sorted(parts: Vec<u32>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        Partition(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn level(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All partitions of `level`, lexicographically largest first.
    pub fn of_level(level: u32) -> Vec<Partition> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fill(level, level, &mut cur, &mut out);
        out
    }

    /// All partitions of level `0..=cutoff`, grouped by ascending level.
    pub fn up_to_level(cutoff: u32) -> Vec<Partition> {
        (0..=cutoff).flat_map(Partition::of_level).collect()
    }
}

fn fill(remaining: u32, max_part: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if remaining == 0 {
        out.push(Partition(cur.clone()));
        return;
    }
    for part in (1..=max_part.min(remaining)).rev() {
        cur.push(part);
        fill(remaining - part, part, cur, out);
        cur.pop();
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "|h>");
        }
        for p in &self.0 {
            write!(f, "L-{p} ")?;
        }
        write!(f, "|h>")
    }
}
