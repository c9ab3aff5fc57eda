//! Seeded generators of random test data: polynomials, connections,
//! morphisms, coefficient tables.
//!
//! Every generator draws from a caller-supplied [`ChaCha8Rng`], so a seed
//! fixes the whole sequence on every platform.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::Chart;
use crate::connection::{BundleConnection, TorsionFreeConnection};
use crate::error::Result;
use crate::graded::{ratio, GeneratorTable, Monomial, MultiIndex, OddSet, Parity, Scalar, SuperPoly};
use crate::supermap::{CoefficientTable, ParityMode, SuperManifoldPresentation, SuperMorphism};

/// Independent stream for case `case` of check `check` under `seed`.
pub fn case_rng(seed: u64, check: u64, case: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(check);
    rng.set_word_pos(u128::from(case) << 20);
    rng
}

/// Nonzero rational with numerator in `-3..=3` and denominator in `1..=3`.
pub fn scalar(rng: &mut ChaCha8Rng) -> Scalar {
    let n = [-3, -2, -1, 1, 2, 3][rng.gen_range(0..6)];
    ratio(n, rng.gen_range(1..=3))
}

fn spread(rng: &mut ChaCha8Rng, slots: usize, total: u32) -> Vec<u32> {
    let mut out = vec![0; slots];
    if slots > 0 {
        for _ in 0..total {
            out[rng.gen_range(0..slots)] += 1;
        }
    }
    out
}

/// Size limits for [`poly`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyShape {
    pub terms: usize,
    pub base_degree: u32,
    pub formal_degree: u32,
    /// Restricts the odd part to subsets of this parity.
    pub parity: Option<Parity>,
}

impl PolyShape {
    pub fn base(terms: usize, degree: u32) -> Self {
        PolyShape {
            terms,
            base_degree: degree,
            formal_degree: 0,
            parity: Some(Parity::Even),
        }
    }
}

/// Sum of up to `shape.terms` random monomials of `table`.
pub fn poly(rng: &mut ChaCha8Rng, table: &Arc<GeneratorTable>, shape: PolyShape) -> SuperPoly {
    let n_odd = table.odd().len();
    let mut p = SuperPoly::zero(table);
    for _ in 0..shape.terms {
        let base_total = rng.gen_range(0..=shape.base_degree);
        let formal_total = rng.gen_range(0..=shape.formal_degree.min(table.truncation()));
        let mut odd: Vec<usize> = (0..n_odd).filter(|_| rng.gen_bool(0.5)).collect();
        match shape.parity {
            Some(Parity::Even) if odd.len() % 2 == 1 => {
                odd.pop();
            }
            Some(Parity::Odd) if odd.len() % 2 == 0 => {
                if n_odd == 0 {
                    continue;
                }
                if odd.is_empty() {
                    odd.push(rng.gen_range(0..n_odd));
                } else {
                    odd.pop();
                }
            }
            _ => {}
        }
        let m = Monomial {
            formal: MultiIndex(spread(rng, table.formal().len(), formal_total)),
            odd: OddSet::from_indices(&odd),
            base: spread(rng, table.base().len(), base_total),
        };
        p = &p + &SuperPoly::monomial(table, m, scalar(rng));
    }
    p
}

/// Chart `x` in dimension 1, `x1, ..., xn` otherwise.
pub fn chart(name: &str, dim: usize) -> Chart {
    let coords: Vec<String> = if dim == 1 {
        vec!["x".into()]
    } else {
        (1..=dim).map(|i| format!("x{i}")).collect()
    };
    Chart::new(name, coords).expect("distinct coordinate names")
}

/// Symmetric Christoffel symbols of degree at most `degree`, each entry
/// zero with probability 1/3.
pub fn connection(rng: &mut ChaCha8Rng, chart: &Chart, degree: u32) -> TorsionFreeConnection {
    let n = chart.dim();
    let ft = chart.function_table();
    let mut g = vec![vec![vec![SuperPoly::zero(&ft); n]; n]; n];
    for gi in g.iter_mut() {
        for j in 0..n {
            for l in j..n {
                if rng.gen_bool(2.0 / 3.0) {
                    let p = poly(rng, &ft, PolyShape::base(2, degree));
                    gi[j][l] = p.clone();
                    gi[l][j] = p;
                }
            }
        }
    }
    TorsionFreeConnection::new(chart, g).expect("symmetric by construction")
}

/// Random bundle connection; entries between fibers of different degree
/// stay zero.
pub fn bundle(
    rng: &mut ChaCha8Rng,
    chart: &Chart,
    fibers: Vec<String>,
    degrees: Vec<i32>,
    degree: u32,
) -> BundleConnection {
    let (n, r) = (chart.dim(), fibers.len());
    let ft = chart.function_table();
    let mut a = vec![vec![vec![SuperPoly::zero(&ft); r]; n]; r];
    for (alpha, rows) in a.iter_mut().enumerate() {
        for row in rows.iter_mut() {
            for (beta, entry) in row.iter_mut().enumerate() {
                if degrees[alpha] == degrees[beta] && rng.gen_bool(0.5) {
                    *entry = poly(rng, &ft, PolyShape::base(2, degree));
                }
            }
        }
    }
    BundleConnection::new(chart, fibers, degrees, a).expect("degree preserving by construction")
}

/// Presentation on `chart` with odd generators `prefix1, ...` of degree 1.
pub fn presentation(name: &str, chart: &Chart, prefix: &str, rank: usize) -> SuperManifoldPresentation {
    let odd = (1..=rank).map(|i| format!("{prefix}{i}")).collect();
    SuperManifoldPresentation::new(name, chart, odd, None).expect("valid presentation")
}

/// Random morphism whose pullbacks have base degree at most `degree`.
pub fn morphism(
    rng: &mut ChaCha8Rng,
    source: &SuperManifoldPresentation,
    target: &SuperManifoldPresentation,
    mode: ParityMode,
    degree: u32,
) -> Result<SuperMorphism> {
    let t = source.table(mode)?;
    let even = |rng: &mut ChaCha8Rng| PolyShape {
        terms: rng.gen_range(1..=4),
        base_degree: degree,
        formal_degree: 0,
        parity: Some(Parity::Even),
    };
    let x = (0..target.chart().dim())
        .map(|_| {
            let s = even(rng);
            poly(rng, &t, s)
        })
        .collect();
    let eta = (0..target.rank())
        .map(|_| {
            let s = PolyShape {
                parity: Some(Parity::Odd),
                ..even(rng)
            };
            poly(rng, &t, s)
        })
        .collect();
    SuperMorphism::new(source, target, mode, x, eta)
}

/// Random antisymmetric coefficient table over `rank` odd indices with
/// values in `table`.
pub fn coefficient_table(rng: &mut ChaCha8Rng, table: &Arc<GeneratorTable>, rank: usize, degree: u32) -> CoefficientTable {
    let mut out = CoefficientTable::new();
    for _ in 0..rng.gen_range(0..=4) {
        let set: Vec<usize> = (0..rank).filter(|_| rng.gen_bool(0.5)).collect();
        let p = poly(rng, table, PolyShape::base(2, degree));
        if !p.is_zero() {
            out.insert(OddSet::from_indices(&set), p);
        }
    }
    out
}

/// A random permutation of `0..n`.
pub fn permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}
