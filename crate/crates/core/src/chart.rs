use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graded::GeneratorTable;

/// A coordinate chart: a name and ordered coordinate names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    name: String,
    coords: Vec<String>,
}

impl Chart {
    pub fn new<S: Into<String>>(name: impl Into<String>, coords: impl IntoIterator<Item = S>) -> Result<Self> {
        let coords: Vec<String> = coords.into_iter().map(Into::into).collect();
        let name = name.into();
        if coords.is_empty() {
            return Err(Error::InvalidArgument(format!("chart `{name}` has no coordinates")));
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(Error::InvalidArgument(format!("chart `{name}` repeats coordinate `{c}`")));
            }
        }
        Ok(Chart { name, coords })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    /// Jet generators `dx` paired with the coordinates.
    pub fn jet_names(&self) -> Vec<String> {
        self.coords.iter().map(|c| format!("d{c}")).collect()
    }

    /// Fiber coordinates of `TM`: `x -> xi`, `x2 -> xi2`, `y -> xi_y`.
    pub fn tangent_names(&self) -> Vec<String> {
        self.coords
            .iter()
            .map(|c| match c.strip_prefix('x') {
                Some(rest) => format!("xi{rest}"),
                None => format!("xi_{c}"),
            })
            .collect()
    }

    /// Coordinates of the second factor of `U x U`.
    pub fn primed_names(&self) -> Vec<String> {
        self.coords.iter().map(|c| format!("{c}'")).collect()
    }

    /// Polynomials in the chart coordinates only.
    pub fn function_table(&self) -> Arc<GeneratorTable> {
        GeneratorTable::builder()
            .base(self.coords.iter().cloned())
            .build()
            .expect("chart coordinates are distinct")
    }

    /// `C(U) (x) R[dx]/m^{k+1}`.
    pub fn jet_table(&self, k: u32) -> Result<Arc<GeneratorTable>> {
        GeneratorTable::builder()
            .base(self.coords.iter().cloned())
            .formal(self.jet_names())
            .truncation(k)
            .build()
    }

    /// Polynomials on `U x U` in `(x, x')`.
    pub fn pair_table(&self) -> Result<Arc<GeneratorTable>> {
        GeneratorTable::builder()
            .base(self.coords.iter().cloned().chain(self.primed_names()))
            .build()
    }

    pub fn same_coords(&self, other: &Chart) -> bool {
        self.coords == other.coords
    }
}
