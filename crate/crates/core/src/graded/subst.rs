use std::sync::Arc;

use super::table::same_table;
use super::{Generator, GeneratorTable, Parity, SuperPoly};
use crate::error::{Error, Result};

/// Algebra homomorphism between two generator tables, given by the images of
/// the source generators.
///
/// Base generators map to even values, formal generators to even nilpotent
/// values (no body term) and odd generators to odd values. Applying the map
/// substitutes generator images monomial by monomial; truncation happens in
/// the target algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraMap {
    source: Arc<GeneratorTable>,
    target: Arc<GeneratorTable>,
    images: Vec<SuperPoly>,
}

impl AlgebraMap {
    /// Builds a map from explicit assignments. Unassigned source generators
    /// map to the target generator with the same name.
    pub fn new<'a>(
        source: &Arc<GeneratorTable>,
        target: &Arc<GeneratorTable>,
        assignments: impl IntoIterator<Item = (&'a str, SuperPoly)>,
    ) -> Result<Self> {
        let mut images: Vec<Option<SuperPoly>> = vec![None; source.len()];
        for (name, value) in assignments {
            let g = source.resolve(name)?;
            if !same_table(value.table(), target) {
                return Err(Error::TableMismatch);
            }
            images[source.position(g)] = Some(value);
        }
        let images = source
            .generators()
            .zip(images)
            .map(|(g, img)| match img {
                Some(v) => Ok(v),
                None => {
                    let name = source.name(g);
                    let tg = target.resolve(name)?;
                    if tg.parity() != g.parity() {
                        return Err(Error::ParityViolation {
                            name: name.to_string(),
                            expected: g.parity(),
                        });
                    }
                    Ok(SuperPoly::from_generator(target, tg))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_images(source, target, images)
    }

    /// Images in table order (base, formal, odd).
    pub fn from_images(
        source: &Arc<GeneratorTable>,
        target: &Arc<GeneratorTable>,
        images: Vec<SuperPoly>,
    ) -> Result<Self> {
        if images.len() != source.len() {
            return Err(Error::DimensionMismatch {
                expected: source.len(),
                found: images.len(),
            });
        }
        for (g, img) in source.generators().zip(&images) {
            if !same_table(img.table(), target) {
                return Err(Error::TableMismatch);
            }
            let ok = match g.parity() {
                Parity::Even => img.is_even(),
                Parity::Odd => img.is_odd(),
            };
            if !ok {
                return Err(Error::ParityViolation {
                    name: source.name(g).to_string(),
                    expected: g.parity(),
                });
            }
            if matches!(g, Generator::Formal(_)) && !img.body().is_zero() {
                return Err(Error::NonNilpotentImage(source.name(g).to_string()));
            }
        }
        Ok(AlgebraMap {
            source: source.clone(),
            target: target.clone(),
            images,
        })
    }

    pub fn identity(table: &Arc<GeneratorTable>) -> Self {
        let images = table
            .generators()
            .map(|g| SuperPoly::from_generator(table, g))
            .collect();
        AlgebraMap {
            source: table.clone(),
            target: table.clone(),
            images,
        }
    }

    pub fn source(&self) -> &Arc<GeneratorTable> {
        &self.source
    }

    pub fn target(&self) -> &Arc<GeneratorTable> {
        &self.target
    }

    pub fn image(&self, g: Generator) -> &SuperPoly {
        &self.images[self.source.position(g)]
    }

    pub fn image_of(&self, name: &str) -> Result<&SuperPoly> {
        Ok(self.image(self.source.resolve(name)?))
    }

    pub fn images(&self) -> &[SuperPoly] {
        &self.images
    }

    pub fn apply(&self, p: &SuperPoly) -> Result<SuperPoly> {
        if !same_table(p.table(), &self.source) {
            return Err(Error::TableMismatch);
        }
        let nb = self.source.base().len();
        let nf = self.source.formal().len();
        // powers[g][e] = image(g)^e, filled up to the largest exponent used
        let mut max_exp = vec![0u32; nb + nf];
        for (m, _) in p.terms() {
            for (i, &e) in m.base.iter().chain(&m.formal.0).enumerate() {
                max_exp[i] = max_exp[i].max(e);
            }
        }
        let powers: Vec<Vec<SuperPoly>> = max_exp
            .iter()
            .enumerate()
            .map(|(i, &top)| {
                let mut v = vec![SuperPoly::one(&self.target)];
                for e in 1..=top as usize {
                    let next = &v[e - 1] * &self.images[i];
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = SuperPoly::zero(&self.target);
        for (m, c) in p.terms() {
            let mut acc = SuperPoly::constant(&self.target, c.clone());
            for (i, &e) in m.base.iter().chain(&m.formal.0).enumerate() {
                if e > 0 {
                    acc = &acc * &powers[i][e as usize];
                    if acc.is_zero() {
                        break;
                    }
                }
            }
            for i in m.odd.iter() {
                if acc.is_zero() {
                    break;
                }
                acc = &acc * &self.images[nb + nf + i];
            }
            for (tm, tc) in acc.terms() {
                out.add_term(tm.clone(), tc.clone());
            }
        }
        Ok(out)
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn after(&self, inner: &AlgebraMap) -> Result<AlgebraMap> {
        if !same_table(inner.target(), &self.source) {
            return Err(Error::TableMismatch);
        }
        let images = inner
            .images
            .iter()
            .map(|img| self.apply(img))
            .collect::<Result<Vec<_>>>()?;
        AlgebraMap::from_images(&inner.source, &self.target, images)
    }
}

/// Substitutes generators of `p` by the given values, all living in one
/// target table (or `p`'s own table when no assignment is given).
pub fn substitute<'a>(
    p: &SuperPoly,
    assignments: impl IntoIterator<Item = (&'a str, SuperPoly)>,
) -> Result<SuperPoly> {
    let assignments: Vec<_> = assignments.into_iter().collect();
    let target = assignments
        .first()
        .map(|(_, v)| v.table().clone())
        .unwrap_or_else(|| p.table().clone());
    AlgebraMap::new(p.table(), &target, assignments)?.apply(p)
}

/// Inverts a formal change of generators `xi -> v(xi)` whose linear part is
/// the identity: returns `w` with `v(w) = xi` modulo truncation.
///
/// `v` has one component per formal generator of its table. Uses the fixed
/// point iteration `w <- w - (v(w) - xi)`, which gains one order per step.
pub fn series_invert(v: &[SuperPoly]) -> Result<Vec<SuperPoly>> {
    let Some(first) = v.first() else {
        return Ok(vec![]);
    };
    let table = first.table().clone();
    if v.len() != table.formal().len() {
        return Err(Error::DimensionMismatch {
            expected: table.formal().len(),
            found: v.len(),
        });
    }
    let xi: Vec<SuperPoly> = (0..v.len())
        .map(|i| SuperPoly::from_generator(&table, Generator::Formal(i)))
        .collect();
    for (i, vi) in v.iter().enumerate() {
        if !same_table(vi.table(), &table) {
            return Err(Error::TableMismatch);
        }
        let rest = vi - &xi[i];
        if let Some(d) = rest.min_formal_degree().filter(|&d| d < 2) {
            return Err(Error::LinearPartNotIdentity(format!(
                "component {} has a term of formal degree {d}",
                table.formal()[i],
            )));
        }
    }
    let compose = |w: &[SuperPoly]| -> Result<Vec<SuperPoly>> {
        let names: Vec<&str> = table.formal().iter().map(String::as_str).collect();
        let map = AlgebraMap::new(&table, &table, names.into_iter().zip(w.iter().cloned()))?;
        v.iter().map(|vi| map.apply(vi)).collect()
    };
    let mut w = xi.clone();
    for _ in 0..=table.truncation() {
        let vw = compose(&w)?;
        let err: Vec<SuperPoly> = vw.iter().zip(&xi).map(|(a, b)| a - b).collect();
        if err.iter().all(SuperPoly::is_zero) {
            return Ok(w);
        }
        w = w.iter().zip(&err).map(|(a, e)| a - e).collect();
    }
    Ok(w)
}
