use std::collections::BTreeMap;

use super::section::{CoefficientTable, SuperfieldSection};
use crate::error::{Error, Result};
use crate::graded::OddSet;

/// Assignment of the odd generators of a product `Z x M` to the two factors:
/// `first` lists the positions of the generators of `L` (over `Z`) and
/// `second` those of `W` (over `M`), each in the factor's own order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OddSplit {
    first: Vec<usize>,
    second: Vec<usize>,
}

impl OddSplit {
    pub fn new(total: usize, first: Vec<usize>, second: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; total];
        for &p in first.iter().chain(&second) {
            if p >= total || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Shape(format!(
                    "malformed split: position {p} out of range or listed twice"
                )));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Shape("malformed split: some odd generator is unassigned".into()));
        }
        Ok(OddSplit { first, second })
    }

    /// The first `q` generators belong to `L`, the next `k` to `W`.
    pub fn leading(q: usize, k: usize) -> Self {
        OddSplit {
            first: (0..q).collect(),
            second: (q..q + k).collect(),
        }
    }

    pub fn first(&self) -> &[usize] {
        &self.first
    }

    pub fn second(&self) -> &[usize] {
        &self.second
    }

    fn total(&self) -> usize {
        self.first.len() + self.second.len()
    }

    /// `(B, A, sign)` with `theta^C = sign * lambda^B theta^A`.
    fn split(&self, c: OddSet) -> Result<(OddSet, OddSet, i32)> {
        if c.iter().any(|p| p >= self.total()) {
            return Err(Error::Shape(format!("odd index {} outside the product", c.iter().max().unwrap_or(0) + 1)));
        }
        let b: Vec<usize> = (0..self.first.len()).filter(|&i| c.contains(self.first[i])).collect();
        let a: Vec<usize> = (0..self.second.len()).filter(|&i| c.contains(self.second[i])).collect();
        let seq: Vec<usize> = b.iter().map(|&i| self.first[i]).chain(a.iter().map(|&i| self.second[i])).collect();
        let inversions: usize = (0..seq.len())
            .map(|i| seq[i + 1..].iter().filter(|&&q| q < seq[i]).count())
            .sum();
        let sign = if inversions % 2 == 0 { 1 } else { -1 };
        Ok((OddSet::from_indices(&b), OddSet::from_indices(&a), sign))
    }

    fn join(&self, b: OddSet, a: OddSet) -> Result<(OddSet, i32)> {
        if b.iter().any(|i| i >= self.first.len()) || a.iter().any(|i| i >= self.second.len()) {
            return Err(Error::Shape("block index outside its factor".into()));
        }
        let positions: Vec<usize> = b.iter().map(|i| self.first[i]).chain(a.iter().map(|i| self.second[i])).collect();
        let c = OddSet::from_indices(&positions);
        let (_, _, sign) = self.split(c)?;
        Ok((c, sign))
    }
}

/// Blocks `B -> (A -> c_{B,A})` of a curried coefficient table, indexed by
/// ascending subsets of the two factors.
pub type CurriedBlocks = BTreeMap<OddSet, CoefficientTable>;

/// Regroups `sum_C c_C theta^C` as `sum_B lambda^B (sum_A c_{B,A} theta^A)`.
pub fn curry(table: &CoefficientTable, split: &OddSplit) -> Result<CurriedBlocks> {
    let mut out = CurriedBlocks::new();
    for (c, value) in table {
        let (b, a, sign) = split.split(*c)?;
        let value = if sign < 0 { -value.clone() } else { value.clone() };
        out.entry(b).or_default().insert(a, value);
    }
    Ok(out)
}

pub fn uncurry(blocks: &CurriedBlocks, split: &OddSplit) -> Result<CoefficientTable> {
    let mut out = CoefficientTable::new();
    for (b, inner) in blocks {
        for (a, value) in inner {
            let (c, sign) = split.join(*b, *a)?;
            let value = if sign < 0 { -value.clone() } else { value.clone() };
            if !value.is_zero() {
                out.insert(c, value);
            }
        }
    }
    Ok(out)
}

/// Curries every component of a section over a product chart.
pub fn curry_section(s: &SuperfieldSection, split: &OddSplit) -> Result<(Vec<CurriedBlocks>, Vec<CurriedBlocks>)> {
    if split.total() != s.source().rank() {
        return Err(Error::Shape(format!(
            "split covers {} odd generators, the source has {}",
            split.total(),
            s.source().rank()
        )));
    }
    let tangent = s.tangent().iter().map(|t| curry(t, split)).collect::<Result<_>>()?;
    let fiber = s.fiber().iter().map(|t| curry(t, split)).collect::<Result<_>>()?;
    Ok((tangent, fiber))
}
