use std::collections::HashMap;
use std::sync::Arc;

use super::Parity;
use crate::error::{Error, Result};

/// Index of a generator inside its table, tagged by kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    Base(usize),
    Formal(usize),
    Odd(usize),
}

impl Generator {
    pub fn parity(self) -> Parity {
        match self {
            Generator::Odd(_) => Parity::Odd,
            _ => Parity::Even,
        }
    }
}

/// Ordered generator names of a graded polynomial algebra plus its truncation
/// order on formal generators.
#[derive(Debug, Clone)]
pub struct GeneratorTable {
    base: Vec<String>,
    formal: Vec<String>,
    odd: Vec<String>,
    odd_degrees: Vec<i32>,
    truncation: u32,
    index: HashMap<String, Generator>,
}

impl PartialEq for GeneratorTable {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
            && self.formal == other.formal
            && self.odd == other.odd
            && self.odd_degrees == other.odd_degrees
            && self.truncation == other.truncation
    }
}

impl Eq for GeneratorTable {}

/// Incremental constructor for [`GeneratorTable`].
#[derive(Debug, Clone, Default)]
pub struct TableBuilder {
    base: Vec<String>,
    formal: Vec<String>,
    odd: Vec<(String, i32)>,
    truncation: u32,
}

impl TableBuilder {
    pub fn base<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.base.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn formal<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.formal.extend(names.into_iter().map(Into::into));
        self
    }

    /// Odd generators with the default degree 1.
    pub fn odd<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.odd.extend(names.into_iter().map(|n| (n.into(), 1)));
        self
    }

    pub fn odd_with_degrees<S: Into<String>>(
        mut self,
        names: impl IntoIterator<Item = (S, i32)>,
    ) -> Self {
        self.odd.extend(names.into_iter().map(|(n, d)| (n.into(), d)));
        self
    }

    pub fn truncation(mut self, k: u32) -> Self {
        self.truncation = k;
        self
    }

    pub fn build(self) -> Result<Arc<GeneratorTable>> {
        let (odd, odd_degrees): (Vec<_>, Vec<_>) = self.odd.into_iter().unzip();
        GeneratorTable::new(self.base, self.formal, odd, odd_degrees, self.truncation)
    }
}

impl GeneratorTable {
    pub fn builder() -> TableBuilder {
        TableBuilder::default()
    }

    pub fn new(
        base: Vec<String>,
        formal: Vec<String>,
        odd: Vec<String>,
        odd_degrees: Vec<i32>,
        truncation: u32,
    ) -> Result<Arc<Self>> {
        if odd.len() > 64 {
            return Err(Error::InvalidTable(format!(
                "at most 64 odd generators are supported, got {}",
                odd.len()
            )));
        }
        if odd_degrees.len() != odd.len() {
            return Err(Error::InvalidTable("one degree per odd generator".into()));
        }
        if let Some(d) = odd_degrees.iter().find(|d| d.rem_euclid(2) == 0) {
            return Err(Error::InvalidTable(format!(
                "odd generator with even degree {d}"
            )));
        }
        let mut index = HashMap::new();
        let tagged = base
            .iter()
            .enumerate()
            .map(|(i, n)| (n, Generator::Base(i)))
            .chain(formal.iter().enumerate().map(|(i, n)| (n, Generator::Formal(i))))
            .chain(odd.iter().enumerate().map(|(i, n)| (n, Generator::Odd(i))));
        for (name, g) in tagged {
            if name.is_empty() {
                return Err(Error::InvalidTable("empty generator name".into()));
            }
            if index.insert(name.clone(), g).is_some() {
                return Err(Error::InvalidTable(format!("duplicate generator `{name}`")));
            }
        }
        Ok(Arc::new(GeneratorTable {
            base,
            formal,
            odd,
            odd_degrees,
            truncation,
            index,
        }))
    }

    pub fn base(&self) -> &[String] {
        &self.base
    }

    pub fn formal(&self) -> &[String] {
        &self.formal
    }

    pub fn odd(&self) -> &[String] {
        &self.odd
    }

    pub fn odd_degrees(&self) -> &[i32] {
        &self.odd_degrees
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn lookup(&self, name: &str) -> Option<Generator> {
        self.index.get(name).copied()
    }

    pub fn resolve(&self, name: &str) -> Result<Generator> {
        self.lookup(name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn name(&self, g: Generator) -> &str {
        match g {
            Generator::Base(i) => &self.base[i],
            Generator::Formal(i) => &self.formal[i],
            Generator::Odd(i) => &self.odd[i],
        }
    }

    /// All generators in table order: base, formal, odd.
    pub fn generators(&self) -> impl Iterator<Item = Generator> + '_ {
        (0..self.base.len())
            .map(Generator::Base)
            .chain((0..self.formal.len()).map(Generator::Formal))
            .chain((0..self.odd.len()).map(Generator::Odd))
    }

    pub fn len(&self) -> usize {
        self.base.len() + self.formal.len() + self.odd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat position of a generator in [`generators`](Self::generators) order.
    pub fn position(&self, g: Generator) -> usize {
        match g {
            Generator::Base(i) => i,
            Generator::Formal(i) => self.base.len() + i,
            Generator::Odd(i) => self.base.len() + self.formal.len() + i,
        }
    }

    /// Same generators, different truncation order.
    pub fn with_truncation(&self, k: u32) -> Arc<Self> {
        let mut t = self.clone();
        t.truncation = k;
        Arc::new(t)
    }

    /// Table keeping only the base generators.
    pub fn base_only(&self) -> Arc<Self> {
        GeneratorTable::new(self.base.clone(), vec![], vec![], vec![], 0)
            .expect("subset of a valid table")
    }
}

pub(crate) fn same_table(a: &Arc<GeneratorTable>, b: &Arc<GeneratorTable>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_rejected() {
        let r = GeneratorTable::builder().base(["x"]).odd(["x"]).build();
        assert!(matches!(r, Err(Error::InvalidTable(_))));
    }

    #[test]
    fn lookup_and_positions() {
        let t = GeneratorTable::builder()
            .base(["x", "y"])
            .formal(["xi"])
            .odd(["th1", "th2"])
            .truncation(3)
            .build()
            .unwrap();
        assert_eq!(t.lookup("xi"), Some(Generator::Formal(0)));
        assert_eq!(t.position(Generator::Odd(1)), 4);
        assert_eq!(t.generators().count(), 5);
        assert!(t.resolve("z").is_err());
    }

    #[test]
    fn odd_generators_need_odd_degree() {
        let r = GeneratorTable::builder()
            .odd_with_degrees([("th", 2)])
            .build();
        assert!(r.is_err());
    }
}
