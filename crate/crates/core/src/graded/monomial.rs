use std::cmp::Ordering;

use num_bigint::BigInt;

use super::factorial;

/// Exponent vector over the formal generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    /// |mu|
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// mu!
    pub fn factorial(&self) -> BigInt {
        self.0.iter().map(|&e| factorial(e)).product()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All multi-indices with `n` components and order at most `k`, in
    /// graded-lex order.
    pub fn all_up_to(n: usize, k: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for d in 0..=k {
            let mut cur = vec![0; n];
            compositions(n, d, 0, &mut cur, &mut out);
        }
        out
    }
}

fn compositions(n: usize, remaining: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if n == 0 {
        if remaining == 0 {
            out.push(MultiIndex(vec![]));
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[pos] = e;
        compositions(n, remaining - e, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// Graded reverse comparison: lower total degree first, then the vector with
/// the larger leading exponent first (so `x1` precedes `x2`).
fn grlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

/// Set of odd generator indices, stored ascending as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct OddSet(pub u64);

impl OddSet {
    pub const EMPTY: OddSet = OddSet(0);

    pub fn single(i: usize) -> Self {
        OddSet(1 << i)
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        OddSet(indices.iter().fold(0, |m, &i| m | (1 << i)))
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(i)
            }
        })
    }

    pub fn indices(self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_disjoint(self, other: OddSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: OddSet) -> OddSet {
        OddSet(self.0 | other.0)
    }

    pub fn without(self, i: usize) -> OddSet {
        OddSet(self.0 & !(1 << i))
    }

    /// Number of elements strictly below `i`.
    pub fn count_below(self, i: usize) -> u32 {
        (self.0 & ((1u64 << i) - 1)).count_ones()
    }

    /// Koszul sign of `theta^self * theta^other` relative to the ascending
    /// product over the union. Caller ensures disjointness.
    pub fn merge_sign(self, other: OddSet) -> i32 {
        let mut inversions = 0;
        for b in other.iter() {
            inversions += (self.0 >> b).count_ones() - u32::from(self.contains(b));
        }
        if inversions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// All subsets of `{0..n}` with exactly `m` elements, ascending in the
    /// canonical term order.
    pub fn subsets_of_size(n: usize, m: usize) -> Vec<OddSet> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(m);
        fn rec(n: usize, m: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<OddSet>) {
            if cur.len() == m {
                out.push(OddSet::from_indices(cur));
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(n, m, i + 1, cur, out);
                cur.pop();
            }
        }
        rec(n, m, 0, &mut cur, &mut out);
        out
    }
}

impl PartialOrd for OddSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OddSet {
    /// Smaller sets first, then lexicographic on the ascending index lists.
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

/// A monomial `base^e * formal^mu * theta^S` with `S` ascending.
///
/// The derived order is the canonical term order: formal part graded-lex
/// first, then the odd subset, then the base part graded-lex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub formal: MultiIndex,
    pub odd: OddSet,
    pub base: Vec<u32>,
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        grlex(&self.formal.0, &other.formal.0)
            .then_with(|| self.odd.cmp(&other.odd))
            .then_with(|| grlex(&self.base, &other.base))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Monomial {
    pub fn one(n_base: usize, n_formal: usize) -> Self {
        Monomial {
            formal: MultiIndex::zero(n_formal),
            odd: OddSet::EMPTY,
            base: vec![0; n_base],
        }
    }

    pub fn formal_degree(&self) -> u32 {
        self.formal.order()
    }

    pub fn is_one(&self) -> bool {
        self.odd.is_empty() && self.formal.0.iter().all(|&e| e == 0) && self.base.iter().all(|&e| e == 0)
    }

    /// Terms with no formal and no odd factor.
    pub fn is_body(&self) -> bool {
        self.odd.is_empty() && self.formal.0.iter().all(|&e| e == 0)
    }

    /// Product with Koszul sign, or `None` when an odd generator repeats.
    pub fn mul(&self, other: &Monomial) -> Option<(Monomial, i32)> {
        if !self.odd.is_disjoint(other.odd) {
            return None;
        }
        let sign = self.odd.merge_sign(other.odd);
        let formal = self
            .formal
            .0
            .iter()
            .zip(&other.formal.0)
            .map(|(a, b)| a + b)
            .collect();
        let base = self.base.iter().zip(&other.base).map(|(a, b)| a + b).collect();
        Some((
            Monomial {
                formal: MultiIndex(formal),
                odd: self.odd.union(other.odd),
                base,
            },
            sign,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_sign_counts_inversions() {
        let a = OddSet::from_indices(&[1]);
        let b = OddSet::from_indices(&[0]);
        assert_eq!(a.merge_sign(b), -1);
        assert_eq!(b.merge_sign(a), 1);
        let ab = OddSet::from_indices(&[0, 2]);
        let c = OddSet::from_indices(&[1, 3]);
        // th0 th2 th1 th3 -> one swap
        assert_eq!(ab.merge_sign(c), -1);
    }

    #[test]
    fn canonical_order_matches_printing_order() {
        // x^2, x*xi, xi^2, x^2*xi^2 in dim 1
        let m = |f: u32, b: u32| Monomial {
            formal: MultiIndex(vec![f]),
            odd: OddSet::EMPTY,
            base: vec![b],
        };
        let mut v = vec![m(2, 2), m(2, 0), m(1, 1), m(0, 2)];
        v.sort();
        assert_eq!(v, vec![m(0, 2), m(1, 1), m(2, 0), m(2, 2)]);
    }

    #[test]
    fn multi_index_enumeration() {
        let all = MultiIndex::all_up_to(2, 2);
        assert_eq!(all.len(), 6);
        assert_eq!(all[1], MultiIndex(vec![1, 0]));
        assert_eq!(all[2], MultiIndex(vec![0, 1]));
        assert_eq!(MultiIndex(vec![2, 3]).factorial(), BigInt::from(12));
    }

    #[test]
    fn subsets_enumerated_in_order() {
        let s = OddSet::subsets_of_size(3, 2);
        assert_eq!(
            s.iter().map(|s| s.indices()).collect::<Vec<_>>(),
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        );
    }
}
