use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::table::same_table;
use super::{Generator, GeneratorTable, Monomial, MultiIndex, OddSet, Parity, Scalar};
use crate::error::{Error, Result};

/// Element of a truncated graded-commutative polynomial algebra.
///
/// Terms with formal degree above the table's truncation order, repeated odd
/// generators and zero coefficients never appear in `terms`.
#[derive(Clone)]
pub struct SuperPoly {
    table: Arc<GeneratorTable>,
    terms: BTreeMap<Monomial, Scalar>,
}

impl PartialEq for SuperPoly {
    fn eq(&self, other: &Self) -> bool {
        same_table(&self.table, &other.table) && self.terms == other.terms
    }
}

impl Eq for SuperPoly {}

impl fmt::Debug for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SuperPoly({self})")
    }
}

impl SuperPoly {
    pub fn zero(table: &Arc<GeneratorTable>) -> Self {
        SuperPoly {
            table: table.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(table: &Arc<GeneratorTable>) -> Self {
        Self::constant(table, Scalar::one())
    }

    pub fn constant(table: &Arc<GeneratorTable>, c: Scalar) -> Self {
        let mut p = Self::zero(table);
        p.add_term(table_one(table), c);
        p
    }

    pub fn generator(table: &Arc<GeneratorTable>, name: &str) -> Result<Self> {
        Ok(Self::from_generator(table, table.resolve(name)?))
    }

    pub fn from_generator(table: &Arc<GeneratorTable>, g: Generator) -> Self {
        let mut m = table_one(table);
        match g {
            Generator::Base(i) => m.base[i] = 1,
            Generator::Formal(i) => m.formal.0[i] = 1,
            Generator::Odd(i) => m.odd = OddSet::single(i),
        }
        let mut p = Self::zero(table);
        p.add_term(m, Scalar::one());
        p
    }

    /// Single term; dropped if beyond the truncation order.
    pub fn monomial(table: &Arc<GeneratorTable>, m: Monomial, c: Scalar) -> Self {
        let mut p = Self::zero(table);
        p.add_term(m, c);
        p
    }

    pub fn from_terms(
        table: &Arc<GeneratorTable>,
        terms: impl IntoIterator<Item = (Monomial, Scalar)>,
    ) -> Self {
        let mut p = Self::zero(table);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn table(&self) -> &Arc<GeneratorTable> {
        &self.table
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Scalar)> + '_ {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Accumulates `c * m`, dropping it when it falls into the truncation ideal.
    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        debug_assert_eq!(m.base.len(), self.table.base().len());
        debug_assert_eq!(m.formal.len(), self.table.formal().len());
        if c.is_zero() || m.formal_degree() > self.table.truncation() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_table(&self, other: &SuperPoly) -> Result<()> {
        if same_table(&self.table, &other.table) {
            Ok(())
        } else {
            Err(Error::TableMismatch)
        }
    }

    pub fn checked_add(&self, other: &SuperPoly) -> Result<SuperPoly> {
        self.check_table(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &SuperPoly) -> Result<SuperPoly> {
        self.check_table(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    /// Graded-commutative product with Koszul signs and truncation.
    pub fn checked_mul(&self, other: &SuperPoly) -> Result<SuperPoly> {
        self.check_table(other)?;
        let k = self.table.truncation();
        let mut out = SuperPoly::zero(&self.table);
        for (ma, ca) in &self.terms {
            let budget = k - ma.formal_degree();
            // terms are sorted by formal degree first
            for (mb, cb) in &other.terms {
                if mb.formal_degree() > budget {
                    break;
                }
                if let Some((m, sign)) = ma.mul(mb) {
                    let c = ca * cb;
                    out.add_term(m, if sign < 0 { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> SuperPoly {
        if c.is_zero() {
            return SuperPoly::zero(&self.table);
        }
        SuperPoly {
            table: self.table.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> SuperPoly {
        let mut acc = SuperPoly::one(&self.table);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Parity if homogeneous; zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| Parity::from_bits(m.odd.len()));
        let first = it.next().unwrap_or(Parity::Even);
        it.all(|p| p == first).then_some(first)
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Some(Parity::Even)
    }

    pub fn is_odd(&self) -> bool {
        self.is_zero() || self.parity() == Some(Parity::Odd)
    }

    /// Parity components `(even, odd)`.
    pub fn split_parity(&self) -> (SuperPoly, SuperPoly) {
        let mut even = SuperPoly::zero(&self.table);
        let mut odd = SuperPoly::zero(&self.table);
        for (m, c) in &self.terms {
            if m.odd.len() % 2 == 0 {
                even.terms.insert(m.clone(), c.clone());
            } else {
                odd.terms.insert(m.clone(), c.clone());
            }
        }
        (even, odd)
    }

    pub fn min_formal_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::formal_degree).min()
    }

    pub fn max_formal_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::formal_degree).max()
    }

    /// Homogeneous component of formal degree `d`.
    pub fn formal_component(&self, d: u32) -> SuperPoly {
        self.filter(|m| m.formal_degree() == d)
    }

    /// Terms with no formal and no odd factor.
    pub fn body(&self) -> SuperPoly {
        self.filter(Monomial::is_body)
    }

    /// Terms without odd factors.
    pub fn odd_free_part(&self) -> SuperPoly {
        self.filter(|m| m.odd.is_empty())
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> SuperPoly {
        SuperPoly {
            table: self.table.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Coefficient of `formal^mu * theta^S` as a polynomial in base
    /// generators (same table).
    pub fn coefficient_of(&self, mu: &MultiIndex, odd: OddSet) -> SuperPoly {
        let mut out = SuperPoly::zero(&self.table);
        for (m, c) in &self.terms {
            if &m.formal == mu && m.odd == odd {
                let mut b = table_one(&self.table);
                b.base = m.base.clone();
                out.terms.insert(b, c.clone());
            }
        }
        out
    }

    /// Distinct `(mu, S)` supports appearing in the polynomial.
    pub fn supports(&self) -> Vec<(MultiIndex, OddSet)> {
        let mut v: Vec<_> = self
            .terms
            .keys()
            .map(|m| (m.formal.clone(), m.odd))
            .collect();
        v.dedup();
        v.sort_by(|a, b| {
            let ma = Monomial { formal: a.0.clone(), odd: a.1, base: vec![] };
            let mb = Monomial { formal: b.0.clone(), odd: b.1, base: vec![] };
            ma.cmp(&mb)
        });
        v.dedup();
        v
    }

    /// Whether only base generators occur.
    pub fn is_base_only(&self) -> bool {
        self.terms.keys().all(Monomial::is_body)
    }

    /// Derivative by a named generator; left derivative for odd generators.
    pub fn derive(&self, name: &str) -> Result<SuperPoly> {
        Ok(self.derive_by(self.table.resolve(name)?))
    }

    pub fn derive_by(&self, g: Generator) -> SuperPoly {
        let mut out = SuperPoly::zero(&self.table);
        for (m, c) in &self.terms {
            match g {
                Generator::Base(i) => {
                    let e = m.base[i];
                    if e > 0 {
                        let mut n = m.clone();
                        n.base[i] -= 1;
                        out.add_term(n, c * Scalar::from_integer(BigInt::from(e)));
                    }
                }
                Generator::Formal(i) => {
                    let e = m.formal.0[i];
                    if e > 0 {
                        let mut n = m.clone();
                        n.formal.0[i] -= 1;
                        out.add_term(n, c * Scalar::from_integer(BigInt::from(e)));
                    }
                }
                Generator::Odd(i) => {
                    if m.odd.contains(i) {
                        let mut n = m.clone();
                        n.odd = m.odd.without(i);
                        let c = if m.odd.count_below(i) % 2 == 0 { c.clone() } else { -c.clone() };
                        out.add_term(n, c);
                    }
                }
            }
        }
        out
    }

    /// Moves the polynomial to another table by matching generator names.
    /// Every generator that occurs must exist in `target` with the same kind
    /// of parity; formal terms are re-truncated.
    pub fn reinterpret(&self, target: &Arc<GeneratorTable>) -> Result<SuperPoly> {
        if same_table(&self.table, target) {
            return Ok(self.clone());
        }
        let mapping: Vec<Option<Generator>> = self
            .table
            .generators()
            .map(|g| target.lookup(self.table.name(g)))
            .collect();
        let mut out = SuperPoly::zero(target);
        for (m, c) in &self.terms {
            let mut n = table_one(target);
            let mut odd_order = Vec::new();
            let used = m
                .base
                .iter()
                .enumerate()
                .map(|(i, &e)| (Generator::Base(i), e))
                .chain(m.formal.0.iter().enumerate().map(|(i, &e)| (Generator::Formal(i), e)))
                .chain(m.odd.iter().map(|i| (Generator::Odd(i), 1)))
                .filter(|&(_, e)| e > 0);
            for (g, e) in used {
                let name = self.table.name(g);
                let tg = mapping[self.table.position(g)]
                    .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
                match (g, tg) {
                    (Generator::Odd(_), Generator::Odd(j)) => odd_order.push(j),
                    (Generator::Odd(_), _) | (_, Generator::Odd(_)) => {
                        return Err(Error::ParityViolation {
                            name: name.to_string(),
                            expected: g.parity(),
                        })
                    }
                    (_, Generator::Base(j)) => n.base[j] += e,
                    (_, Generator::Formal(j)) => n.formal.0[j] += e,
                }
            }
            // sign of sorting the odd factors into the target's order
            let mut inversions = 0;
            for a in 0..odd_order.len() {
                for b in a + 1..odd_order.len() {
                    if odd_order[a] > odd_order[b] {
                        inversions += 1;
                    }
                }
            }
            n.odd = OddSet::from_indices(&odd_order);
            out.add_term(n, if inversions % 2 == 0 { c.clone() } else { -c.clone() });
        }
        Ok(out)
    }

    /// Evaluates a base-only polynomial at a floating-point point.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .filter(|(m, _)| m.is_body())
            .map(|(m, c)| {
                let v: f64 = m
                    .base
                    .iter()
                    .zip(point)
                    .map(|(&e, &x)| x.powi(e as i32))
                    .product();
                c.to_f64().unwrap_or(f64::NAN) * v
            })
            .sum()
    }

    /// Canonical text form.
    pub fn to_canonical(&self) -> String {
        self.to_string()
    }
}

pub(crate) fn table_one(table: &GeneratorTable) -> Monomial {
    Monomial::one(table.base().len(), table.formal().len())
}

impl fmt::Display for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let abs = c.abs();
            let factors = monomial_factors(&self.table, m);
            if factors.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                f.write_str(&factors.join("*"))?;
            } else {
                write!(f, "{abs}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

fn monomial_factors(table: &GeneratorTable, m: &Monomial) -> Vec<String> {
    let pw = |name: &str, e: u32| {
        if e == 1 {
            name.to_string()
        } else {
            format!("{name}^{e}")
        }
    };
    let mut out = Vec::new();
    for (i, &e) in m.base.iter().enumerate() {
        if e > 0 {
            out.push(pw(&table.base()[i], e));
        }
    }
    for (i, &e) in m.formal.0.iter().enumerate() {
        if e > 0 {
            out.push(pw(&table.formal()[i], e));
        }
    }
    for i in m.odd.iter() {
        out.push(table.odd()[i].clone());
    }
    out
}

impl<'a> Add<&'a SuperPoly> for &'a SuperPoly {
    type Output = SuperPoly;
    fn add(self, rhs: &'a SuperPoly) -> SuperPoly {
        self.checked_add(rhs).expect("generator table mismatch in add")
    }
}

impl<'a> Sub<&'a SuperPoly> for &'a SuperPoly {
    type Output = SuperPoly;
    fn sub(self, rhs: &'a SuperPoly) -> SuperPoly {
        self.checked_sub(rhs).expect("generator table mismatch in sub")
    }
}

impl<'a> Mul<&'a SuperPoly> for &'a SuperPoly {
    type Output = SuperPoly;
    fn mul(self, rhs: &'a SuperPoly) -> SuperPoly {
        self.checked_mul(rhs).expect("generator table mismatch in mul")
    }
}

impl Add for SuperPoly {
    type Output = SuperPoly;
    fn add(self, rhs: SuperPoly) -> SuperPoly {
        &self + &rhs
    }
}

impl Sub for SuperPoly {
    type Output = SuperPoly;
    fn sub(self, rhs: SuperPoly) -> SuperPoly {
        &self - &rhs
    }
}

impl Mul for SuperPoly {
    type Output = SuperPoly;
    fn mul(self, rhs: SuperPoly) -> SuperPoly {
        &self * &rhs
    }
}

impl Neg for &SuperPoly {
    type Output = SuperPoly;
    fn neg(self) -> SuperPoly {
        SuperPoly {
            table: self.table.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for SuperPoly {
    type Output = SuperPoly;
    fn neg(self) -> SuperPoly {
        -&self
    }
}
