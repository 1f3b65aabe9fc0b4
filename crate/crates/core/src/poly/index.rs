use std::cmp::Ordering;
use std::fmt;

/// Exponent vector of a monomial `x^α = x₁^α₁ ⋯ xₙ^αₙ`.
///
/// Ordered graded-lexicographically: lower total degree first, and within a
/// degree the exponent of `x₁` dominates (so `x` precedes `y`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The index of the coordinate monomial `x_i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All indices in `n` variables with total degree at most `max_degree`,
    /// in graded-lexicographic order.
    pub fn up_to_degree(n: usize, max_degree: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for d in 0..=max_degree {
            let mut current = vec![0u32; n];
            push_compositions(&mut out, &mut current, 0, d);
        }
        out.sort();
        out
    }
}

fn push_compositions(out: &mut Vec<MultiIndex>, current: &mut [u32], pos: usize, remaining: u32) {
    let n = current.len();
    if n == 0 {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        current[pos] = remaining;
        out.push(MultiIndex(current.to_vec()));
        current[pos] = 0;
        return;
    }
    for e in 0..=remaining {
        current[pos] = e;
        push_compositions(out, current, pos + 1, remaining - e);
    }
    current[pos] = 0;
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let mut v = [
            MultiIndex::new(vec![0, 1]),
            MultiIndex::new(vec![3, 0]),
            MultiIndex::new(vec![0, 0]),
            MultiIndex::new(vec![1, 0]),
            MultiIndex::new(vec![1, 1]),
        ];
        v.sort();
        let e: Vec<_> = v.iter().map(|m| m.exponents().to_vec()).collect();
        assert_eq!(e, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1], vec![3, 0]]);
    }

    #[test]
    fn enumerates_all_monomials() {
        // C(n + d, d) monomials of degree <= d in n variables
        assert_eq!(MultiIndex::up_to_degree(2, 3).len(), 10);
        assert_eq!(MultiIndex::up_to_degree(3, 2).len(), 10);
        assert_eq!(MultiIndex::up_to_degree(1, 0).len(), 1);
        let all = MultiIndex::up_to_degree(3, 3);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }
}
