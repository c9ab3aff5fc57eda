//! Seeded property checks over the whole library, grouped into suites.
//!
//! Each check runs a number of independent cases; case `i` of a check draws
//! its data from [`case_rng`]`(seed, check, i)`, so reports are identical
//! across runs and thread counts. Cases run in parallel and are collected
//! in order.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chart::Chart;
use crate::connection::{exp_chi, geodesic_jet, psi_automorphism, BundleConnection, ChiDerivation, TorsionFreeConnection};
use crate::graded::{ratio, AlgebraMap, Generator, SuperPoly};
use crate::numerics::{
    chart_phi, chart_psi, exp_numeric, parallel_transport, sup_distance, tangent_check, transport_matrix,
    trivialize_over_chart, DiscreteMap, DiscreteSection, NewtonOptions, NumericBundleConnection, NumericConnection,
    SampleGrid, SampledPath,
};
use crate::random::{self, case_rng, PolyShape};
use crate::supermap::{
    check_even_degree, curry, curry_section, diagonal_vanishing_check, morphism_to_section, section_to_morphism,
    uncurry, CurriedBlocks, OddSplit, ParityMode, SuperManifoldPresentation, SuperMorphism,
};

type CaseResult = std::result::Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

trait Context<T> {
    fn ctx(self, what: &str) -> std::result::Result<T, String>;
}

impl<T, E: fmt::Display> Context<T> for std::result::Result<T, E> {
    fn ctx(self, what: &str) -> std::result::Result<T, String> {
        self.map_err(|e| format!("{what}: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Core,
    Supermap,
    Numeric,
    All,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Core => "core",
            Suite::Supermap => "supermap",
            Suite::Numeric => "numeric",
            Suite::All => "all",
        }
    }

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "core" => Ok(Suite::Core),
            "supermap" => Ok(Suite::Supermap),
            "numeric" => Ok(Suite::Numeric),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite `{s}` (core, supermap, numeric, all)")),
        }
    }
}

/// One named property, run per case.
#[derive(Clone, Copy)]
pub struct Check {
    pub name: &'static str,
    pub suite: Suite,
    /// Fixed examples run once whatever the case count.
    pub fixed: bool,
    run: fn(&mut ChaCha8Rng) -> CaseResult,
}

impl fmt::Debug for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Check").field("name", &self.name).field("suite", &self.suite).finish()
    }
}

pub const CHECKS: &[Check] = &[
    Check { name: "phi-identity", suite: Suite::Core, fixed: false, run: phi_identity },
    Check { name: "geodesic-coefficients", suite: Suite::Core, fixed: false, run: geodesic_coefficients },
    Check { name: "psi-automorphism", suite: Suite::Core, fixed: false, run: psi_suite },
    Check { name: "psi-example", suite: Suite::Core, fixed: true, run: psi_example },
    Check { name: "bijection", suite: Suite::Supermap, fixed: false, run: bijection },
    Check { name: "bijection-inner-hom", suite: Suite::Supermap, fixed: false, run: bijection_inner_hom },
    Check { name: "diagonal-lemma", suite: Suite::Supermap, fixed: false, run: diagonal_lemma },
    Check { name: "curry-round-trip", suite: Suite::Supermap, fixed: false, run: curry_round_trip },
    Check { name: "curry-commutes", suite: Suite::Supermap, fixed: false, run: curry_commutes },
    Check { name: "exp-closed-form", suite: Suite::Numeric, fixed: false, run: exp_closed_form },
    Check { name: "rk4-order", suite: Suite::Numeric, fixed: false, run: rk4_order },
    Check { name: "chart-round-trip", suite: Suite::Numeric, fixed: false, run: chart_round_trip },
    Check { name: "chart-transition", suite: Suite::Numeric, fixed: false, run: chart_transition },
    Check { name: "transport", suite: Suite::Numeric, fixed: false, run: transport },
    Check { name: "trivialization", suite: Suite::Numeric, fixed: false, run: trivialization },
    Check { name: "tangent-check", suite: Suite::Numeric, fixed: false, run: tangent },
];

pub fn find_check(name: &str) -> Option<&'static Check> {
    CHECKS.iter().find(|c| c.name == name)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub suite: Suite,
    pub cases: usize,
    pub passed: usize,
    /// First failing case and its message.
    pub first_failure: Option<(usize, String)>,
}

impl CheckOutcome {
    pub fn ok(&self) -> bool {
        self.passed == self.cases
    }
}

impl Check {
    pub fn run(&self, seed: u64, cases: usize) -> CheckOutcome {
        let id = CHECKS.iter().position(|c| c.name == self.name).unwrap_or(0) as u64;
        let cases = if self.fixed { 1 } else { cases };
        let results: Vec<CaseResult> = (0..cases)
            .into_par_iter()
            .map(|i| (self.run)(&mut case_rng(seed, id, i as u64)))
            .collect();
        CheckOutcome {
            name: self.name,
            suite: self.suite,
            cases,
            passed: results.iter().filter(|r| r.is_ok()).count(),
            first_failure: results.into_iter().enumerate().find_map(|(i, r)| r.err().map(|e| (i, e))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub suite: Suite,
    pub seed: u64,
    pub cases: usize,
    pub checks: Vec<CheckOutcome>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::ok)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {} seed {} cases {}", self.suite.as_str(), self.seed, self.cases)?;
        for c in &self.checks {
            let status = if c.ok() { "PASS" } else { "FAIL" };
            writeln!(f, "{:<24}{:<10}{:>5}/{:<5}{status}", c.name, c.suite.as_str(), c.passed, c.cases)?;
            if let Some((i, msg)) = &c.first_failure {
                writeln!(f, "    case {i}: {msg}")?;
            }
        }
        let ok = self.checks.iter().filter(|c| c.ok()).count();
        writeln!(f, "{ok}/{} checks passed", self.checks.len())
    }
}

pub fn run(suite: Suite, seed: u64, cases: usize) -> Report {
    let checks = CHECKS
        .iter()
        .filter(|c| suite.includes(c.suite))
        .map(|c| c.run(seed, cases))
        .collect();
    Report { suite, seed, cases, checks }
}

fn named_chart(name: &str, prefix: &str, dim: usize) -> Chart {
    let coords: Vec<String> = if dim == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=dim).map(|i| format!("{prefix}{i}")).collect()
    };
    Chart::new(name, coords).expect("distinct names")
}

fn phi_identity(rng: &mut ChaCha8Rng) -> CaseResult {
    let dim = rng.gen_range(1..=3);
    let k = rng.gen_range(1..=4);
    let chart = random::chart("N", dim);
    let gamma = random::connection(rng, &chart, 2);
    let ft = chart.function_table();
    let h = random::poly(rng, &ft, PolyShape::base(3, 3));
    let chi = ChiDerivation::new(&gamma, None, k).ctx("chi")?;
    let lhs = exp_chi(&chi, &h).ctx("exp chi")?;
    let symbol = &chi.tables().symbol;
    let delta = geodesic_jet(&gamma, k).ctx("geodesic jet")?;
    let shifted = chart
        .coords()
        .iter()
        .zip(&delta)
        .map(|(x, d)| Ok((x.as_str(), SuperPoly::generator(symbol, x)? + d.reinterpret(symbol)?)))
        .collect::<crate::Result<Vec<_>>>()
        .ctx("x + dx")?;
    let rhs = AlgebraMap::new(&ft, symbol, shifted).and_then(|m| m.apply(&h)).ctx("h(x + dx)")?;
    ensure!(lhs == rhs, "h = {h}, k = {k}: exp(chi)(h) = {lhs} but h(x + dx) = {rhs}");
    Ok(())
}

fn geodesic_coefficients(rng: &mut ChaCha8Rng) -> CaseResult {
    let dim = rng.gen_range(1..=3);
    let chart = random::chart("N", dim);
    let gamma = random::connection(rng, &chart, 2);
    let delta = geodesic_jet(&gamma, 3).ctx("geodesic jet")?;
    let t = delta[0].table().clone();
    let xi: Vec<SuperPoly> = (0..dim).map(|i| SuperPoly::from_generator(&t, Generator::Formal(i))).collect();
    let g = |i: usize, j: usize, l: usize| gamma.christoffel(i, j, l).reinterpret(&t);
    for i in 0..dim {
        let mut c2 = SuperPoly::zero(&t);
        let mut c3 = SuperPoly::zero(&t);
        for j in 0..dim {
            for l in 0..dim {
                let gijl = g(i, j, l).ctx("gamma")?;
                c2 = &c2 + &(&gijl * &(&xi[j] * &xi[l])).scale(&ratio(-1, 2));
                for s in 0..dim {
                    let mut inner = -gijl.derive(&chart.coords()[s]).ctx("derivative")?;
                    for p in 0..dim {
                        let prod = &g(i, p, s).ctx("gamma")? * &g(p, j, l).ctx("gamma")?;
                        inner = &inner + &prod.scale(&ratio(2, 1));
                    }
                    let mono = &(&xi[s] * &xi[j]) * &xi[l];
                    c3 = &c3 + &(&inner * &mono).scale(&ratio(1, 6));
                }
            }
        }
        ensure!(delta[i].formal_component(1) == xi[i], "linear term of dx^{i} is {}", delta[i].formal_component(1));
        ensure!(delta[i].formal_component(2) == c2, "xi^2 term of dx^{i}: {} vs {c2}", delta[i].formal_component(2));
        ensure!(delta[i].formal_component(3) == c3, "xi^3 term of dx^{i}: {} vs {c3}", delta[i].formal_component(3));
    }
    Ok(())
}

fn maybe_bundle(rng: &mut ChaCha8Rng, chart: &Chart, rank: usize) -> Option<BundleConnection> {
    (rank > 0).then(|| {
        let fibers = (1..=rank).map(|i| format!("v{i}")).collect();
        random::bundle(rng, chart, fibers, vec![1; rank], 1)
    })
}

fn psi_suite(rng: &mut ChaCha8Rng) -> CaseResult {
    let dim = rng.gen_range(1..=2);
    let k = rng.gen_range(1..=3);
    let rank = rng.gen_range(0..=2);
    let chart = random::chart("N", dim);
    let g: Vec<TorsionFreeConnection> = (0..3).map(|_| random::connection(rng, &chart, 2)).collect();
    let b: Vec<Option<BundleConnection>> = (0..3).map(|_| maybe_bundle(rng, &chart, rank)).collect();
    let psi = |a: usize, c: usize| psi_automorphism(&g[a], &g[c], b[a].as_ref(), b[c].as_ref(), k).ctx("psi");
    let (p01, p12, p02) = (psi(0, 1)?, psi(1, 2)?, psi(0, 2)?);
    let t = p01.source().clone();
    let element = |rng: &mut ChaCha8Rng| {
        let shape = PolyShape {
            terms: 3,
            base_degree: 2,
            formal_degree: k,
            parity: None,
        };
        random::poly(rng, &t, shape)
    };
    for _ in 0..20 {
        let (a, c) = (element(rng), element(rng));
        let lhs = p01.apply(&(&a * &c)).ctx("psi")?;
        let rhs = &p01.apply(&a).ctx("psi")? * &p01.apply(&c).ctx("psi")?;
        ensure!(lhs == rhs, "psi(ab) != psi(a) psi(b) for a = {a}, b = {c}");
    }
    for x in chart.coords() {
        let gx = SuperPoly::generator(&t, x).ctx("coordinate")?;
        ensure!(p01.apply(&gx).ctx("psi")? == gx, "psi moves {x}");
    }
    for _ in 0..3 {
        let a = element(rng);
        let mut d = a.clone();
        for _ in 0..=k {
            let next = p01.apply(&d).ctx("psi")? - d.clone();
            if let (Some(before), Some(after)) = (d.min_formal_degree(), next.min_formal_degree()) {
                ensure!(after > before, "psi - id does not raise the filtration on {d}");
            }
            d = next;
        }
        ensure!(d.is_zero(), "(psi - id)^{} of {a} is {d}", k + 1);
    }
    for gen in t.generators() {
        let p = SuperPoly::from_generator(&t, gen);
        let lhs = p12.apply(&p01.apply(&p).ctx("psi")?).ctx("psi")?;
        ensure!(lhs == p02.apply(&p).ctx("psi")?, "cocycle fails on {}", t.name(gen));
    }
    Ok(())
}

fn psi_example(_: &mut ChaCha8Rng) -> CaseResult {
    let chart = random::chart("N", 1);
    let ft = chart.function_table();
    let x = SuperPoly::generator(&ft, "x").ctx("x")?;
    let g1 = TorsionFreeConnection::new(&chart, vec![vec![vec![x]]]).ctx("connection")?;
    let psi = psi_automorphism(&TorsionFreeConnection::flat(&chart), &g1, None, None, 2).ctx("psi")?;
    let out = psi.image_of("xi").ctx("image")?.to_string();
    ensure!(out == "xi - 1/2*x*xi^2", "psi(xi) = {out}");
    Ok(())
}

struct MorphismSetup {
    source: SuperManifoldPresentation,
    target: SuperManifoldPresentation,
    gamma: TorsionFreeConnection,
    bundle: Option<BundleConnection>,
}

fn morphism_setup(rng: &mut ChaCha8Rng) -> MorphismSetup {
    let src_chart = named_chart("M", "y", rng.gen_range(1..=2));
    let dst_chart = named_chart("N", "x", rng.gen_range(1..=2));
    let source = random::presentation("M", &src_chart, "th", rng.gen_range(0..=3));
    let target = random::presentation("N", &dst_chart, "eta", rng.gen_range(0..=2));
    let gamma = random::connection(rng, &dst_chart, 2);
    let bundle = (target.rank() > 0 && rng.gen_bool(0.5))
        .then(|| random::bundle(rng, &dst_chart, target.odd_names().to_vec(), target.degrees().to_vec(), 1));
    MorphismSetup { source, target, gamma, bundle }
}

fn round_trip(rng: &mut ChaCha8Rng, mode: ParityMode) -> CaseResult {
    let s = morphism_setup(rng);
    let f = random::morphism(rng, &s.source, &s.target, mode, 2).ctx("random morphism")?;
    let sec = morphism_to_section(&f, &s.gamma, s.bundle.as_ref()).ctx("to section")?;
    if mode == ParityMode::Even {
        ensure!(check_even_degree(&sec), "section of a classical morphism has odd degree:\n{f}");
    }
    let back = section_to_morphism(&sec, &s.gamma, s.bundle.as_ref()).ctx("to morphism")?;
    ensure!(back == f, "round trip changed\n{f}into\n{back}");
    Ok(())
}

fn bijection(rng: &mut ChaCha8Rng) -> CaseResult {
    round_trip(rng, ParityMode::Even)
}

fn bijection_inner_hom(rng: &mut ChaCha8Rng) -> CaseResult {
    round_trip(rng, ParityMode::All)
}

fn diagonal_lemma(rng: &mut ChaCha8Rng) -> CaseResult {
    let s = morphism_setup(rng);
    let f = random::morphism(rng, &s.source, &s.target, ParityMode::Even, 2).ctx("random morphism")?;
    let chart = s.target.chart();
    let pair = chart.pair_table().ctx("pair table")?;
    let k = s.source.rank();
    let differences: Vec<SuperPoly> = chart
        .coords()
        .iter()
        .zip(chart.primed_names())
        .map(|(x, xp)| Ok(SuperPoly::generator(&pair, &xp)? - SuperPoly::generator(&pair, x)?))
        .collect::<crate::Result<_>>()
        .ctx("diagonal ideal")?;
    for _ in 0..10 {
        let mut big_f = SuperPoly::zero(&pair);
        for _ in 0..rng.gen_range(1..=2) {
            let mut term = random::poly(rng, &pair, PolyShape::base(2, 1));
            for _ in 0..=k {
                term = &term * &differences[rng.gen_range(0..differences.len())];
            }
            big_f = &big_f + &term;
        }
        let image = diagonal_vanishing_check(&f, &big_f).ctx("pullback")?;
        ensure!(image.is_zero(), "F = {big_f} pulls back to {image}");
    }
    Ok(())
}

fn curry_round_trip(rng: &mut ChaCha8Rng) -> CaseResult {
    let n = rng.gen_range(0..=5);
    let q = rng.gen_range(0..=n);
    let p = random::permutation(rng, n);
    let split = OddSplit::new(n, p[..q].to_vec(), p[q..].to_vec()).ctx("split")?;
    let ft = named_chart("P", "z", 2).function_table();
    let t = random::coefficient_table(rng, &ft, n, 2);
    let blocks = curry(&t, &split).ctx("curry")?;
    ensure!(uncurry(&blocks, &split).ctx("uncurry")? == t, "uncurry o curry changed the table");
    Ok(())
}

fn curry_commutes(rng: &mut ChaCha8Rng) -> CaseResult {
    let q = rng.gen_range(0..=2);
    let k = rng.gen_range(0..=2);
    let product = Chart::new("P", ["z", "y"]).expect("distinct names");
    let lam: Vec<String> = (1..=q).map(|i| format!("lam{i}")).collect();
    let th: Vec<String> = (1..=k).map(|i| format!("th{i}")).collect();
    let p1 = SuperManifoldPresentation::new("P", &product, [lam.clone(), th.clone()].concat(), None).ctx("P1")?;
    let p2 = SuperManifoldPresentation::new("P", &product, [th.clone(), lam.clone()].concat(), None).ctx("P2")?;
    let p0 = SuperManifoldPresentation::new("P", &product, th.clone(), None).ctx("P0")?;
    let dst_chart = named_chart("N", "x", rng.gen_range(1..=2));
    let target = random::presentation("N", &dst_chart, "eta", rng.gen_range(0..=2));
    let gamma = random::connection(rng, &dst_chart, 2);
    let bundle = maybe_bundle_for(rng, &target);

    let f1 = random::morphism(rng, &p1, &target, ParityMode::Even, 2).ctx("random morphism")?;
    let f2 = SuperMorphism::new(&p2, &target, ParityMode::Even, f1.x_pullbacks().to_vec(), f1.eta_pullbacks().to_vec())
        .ctx("reordered morphism")?;
    let s1 = morphism_to_section(&f1, &gamma, bundle.as_ref()).ctx("section over (lam, th)")?;
    let s2 = morphism_to_section(&f2, &gamma, bundle.as_ref()).ctx("section over (th, lam)")?;
    let c1 = curry_section(&s1, &OddSplit::leading(q, k)).ctx("curry")?;
    let split2 = OddSplit::new(q + k, (k..k + q).collect(), (0..k).collect()).ctx("split")?;
    let c2 = curry_section(&s2, &split2).ctx("curry")?;
    ensure!(c1 == c2, "curried sections depend on the generator order");

    let t1 = p1.table(ParityMode::Even).ctx("table")?;
    let t0 = p0.table(ParityMode::Even).ctx("table")?;
    let zero = SuperPoly::zero(&t0);
    let kill = AlgebraMap::new(&t1, &t0, lam.iter().map(|l| (l.as_str(), zero.clone()))).ctx("lam = 0")?;
    let restrict = |v: &[SuperPoly]| v.iter().map(|p| kill.apply(p)).collect::<crate::Result<Vec<_>>>();
    let f0 = SuperMorphism::new(
        &p0,
        &target,
        ParityMode::Even,
        restrict(f1.x_pullbacks()).ctx("restrict")?,
        restrict(f1.eta_pullbacks()).ctx("restrict")?,
    )
    .ctx("restricted morphism")?;
    let s0 = morphism_to_section(&f0, &gamma, bundle.as_ref()).ctx("restricted section")?;
    let empty_block = |blocks: &[CurriedBlocks]| -> Vec<_> {
        blocks.iter().map(|b| b.get(&crate::graded::OddSet::EMPTY).cloned().unwrap_or_default()).collect()
    };
    ensure!(empty_block(&c1.0) == s0.tangent(), "lam-free tangent block differs from the restricted section");
    ensure!(empty_block(&c1.1) == s0.fiber(), "lam-free fiber block differs from the restricted section");
    Ok(())
}

fn maybe_bundle_for(rng: &mut ChaCha8Rng, target: &SuperManifoldPresentation) -> Option<BundleConnection> {
    (target.rank() > 0 && rng.gen_bool(0.5)).then(|| {
        random::bundle(rng, target.chart(), target.odd_names().to_vec(), target.degrees().to_vec(), 1)
    })
}

fn constant_connection(c: i64, d: i64) -> std::result::Result<(f64, NumericConnection), String> {
    let chart = random::chart("N", 1);
    let g = SuperPoly::constant(&chart.function_table(), ratio(c, d));
    let conn = TorsionFreeConnection::new(&chart, vec![vec![vec![g]]]).ctx("connection")?;
    Ok((c as f64 / d as f64, NumericConnection::new(&conn).ctx("numeric connection")?))
}

/// Christoffel symbols `a + b x^1` with small coefficients.
fn small_connection(rng: &mut ChaCha8Rng, dim: usize) -> std::result::Result<NumericConnection, String> {
    let chart = random::chart("N", dim);
    let ft = chart.function_table();
    let x1 = SuperPoly::from_generator(&ft, Generator::Base(0));
    let mut g = vec![vec![vec![SuperPoly::zero(&ft); dim]; dim]; dim];
    for gi in g.iter_mut() {
        for j in 0..dim {
            for l in j..dim {
                let a = SuperPoly::constant(&ft, ratio(rng.gen_range(-4..=4), 8));
                let p = &a + &x1.scale(&ratio(rng.gen_range(-4..=4), 8));
                gi[j][l] = p.clone();
                gi[l][j] = p;
            }
        }
    }
    let conn = TorsionFreeConnection::new(&chart, g).ctx("connection")?;
    NumericConnection::new(&conn).ctx("numeric connection")
}

fn small_bundle(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> std::result::Result<NumericBundleConnection, String> {
    let chart = random::chart("N", dim);
    let ft = chart.function_table();
    let x1 = SuperPoly::from_generator(&ft, Generator::Base(0));
    let a = (0..rank)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    (0..rank)
                        .map(|_| {
                            &SuperPoly::constant(&ft, ratio(rng.gen_range(-4..=4), 4))
                                + &x1.scale(&ratio(rng.gen_range(-4..=4), 8))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let fibers = (1..=rank).map(|i| format!("v{i}")).collect();
    let b = BundleConnection::new(&chart, fibers, vec![1; rank], a).ctx("bundle")?;
    NumericBundleConnection::new(&b).ctx("numeric bundle")
}

fn vectors(rng: &mut ChaCha8Rng, count: usize, dim: usize, r: f64) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..dim).map(|_| rng.gen_range(-r..r)).collect()).collect()
}

fn line_grid(points: usize) -> SampleGrid {
    let pts = (0..points).map(|j| vec![-1.0 + 2.0 * j as f64 / (points - 1) as f64]).collect();
    SampleGrid::new(pts).expect("non-empty grid")
}

fn exp_closed_form(rng: &mut ChaCha8Rng) -> CaseResult {
    let (c, conn) = constant_connection(rng.gen_range(1..=6), 4)?;
    let xi: f64 = rng.gen_range(-0.3..0.8);
    let z = exp_numeric(&conn, &[0.0], &[xi], 200).ctx("exp")?[0];
    let exact = (1.0 + c * xi).ln() / c;
    ensure!((z - exact).abs() < 1e-8, "c = {c}, xi = {xi}: error {:e}", (z - exact).abs());
    ensure!(exp_numeric(&conn, &[0.3], &[0.0], 200).ctx("exp")? == vec![0.3], "exp of the zero vector moved");
    Ok(())
}

fn rk4_order(rng: &mut ChaCha8Rng) -> CaseResult {
    let (c, conn) = constant_connection(rng.gen_range(2..=6), 4)?;
    let xi: f64 = rng.gen_range(0.5..0.9);
    let exact = (1.0 + c * xi).ln() / c;
    let err = |steps| -> std::result::Result<f64, String> {
        Ok((exp_numeric(&conn, &[0.0], &[xi], steps).ctx("exp")?[0] - exact).abs())
    };
    let ratio = err(10)? / err(20)?;
    ensure!((ratio - 16.0).abs() <= 3.0, "c = {c}, xi = {xi}: error ratio {ratio}");
    Ok(())
}

fn chart_round_trip(rng: &mut ChaCha8Rng) -> CaseResult {
    let dim = rng.gen_range(1..=2);
    let conn = small_connection(rng, dim)?;
    let grid = line_grid(64);
    let f = DiscreteMap::new(grid.clone(), vectors(rng, 64, dim, 0.5)).ctx("map")?;
    let s = DiscreteSection::new(grid, vectors(rng, 64, dim, 0.25)).ctx("section")?;
    let g = chart_psi(&f, &s, &conn, 200).ctx("psi")?;
    let back = chart_phi(&f, &g, &conn, &NewtonOptions::default()).ctx("phi")?;
    let e1 = sup_distance(&back.vectors, &s.vectors);
    ensure!(e1 <= 1e-6, "phi o psi error {e1:e}");
    let again = chart_psi(&f, &back, &conn, 200).ctx("psi")?;
    let e2 = sup_distance(&again.values, &g.values);
    ensure!(e2 <= 1e-6, "psi o phi error {e2:e}");
    let zero = chart_psi(&f, &DiscreteSection::zero(&f.grid, dim), &conn, 200).ctx("psi")?;
    ensure!(zero.values == f.values, "psi of the zero section moved f");
    Ok(())
}

fn chart_transition(rng: &mut ChaCha8Rng) -> CaseResult {
    let dim = rng.gen_range(1..=2);
    let conn = small_connection(rng, dim)?;
    let grid = line_grid(16);
    let opts = NewtonOptions::default();
    let f = DiscreteMap::new(grid.clone(), vectors(rng, 16, dim, 0.5)).ctx("map")?;
    let shift = DiscreteSection::new(grid.clone(), vectors(rng, 16, dim, 0.1)).ctx("section")?;
    let g = chart_psi(&f, &shift, &conn, 200).ctx("psi")?;
    let t = DiscreteSection::new(grid, vectors(rng, 16, dim, 0.1)).ctx("section")?;
    let u = chart_phi(&f, &chart_psi(&g, &t, &conn, 200).ctx("psi")?, &conn, &opts).ctx("phi_f")?;
    let back = chart_phi(&g, &chart_psi(&f, &u, &conn, 200).ctx("psi")?, &conn, &opts).ctx("phi_g")?;
    let e = sup_distance(&back.vectors, &t.vectors);
    ensure!(e <= 1e-5, "transition maps are not inverse: {e:e}");
    Ok(())
}

fn transport(rng: &mut ChaCha8Rng) -> CaseResult {
    // scalar closed form over a path that may turn back
    let a = rng.gen_range(-4..=4) as f64 / 4.0;
    let scalar = {
        let chart = random::chart("N", 1);
        let ft = chart.function_table();
        let b = BundleConnection::new(
            &chart,
            vec!["v".into()],
            vec![1],
            vec![vec![vec![SuperPoly::constant(&ft, ratio((a * 4.0) as i64, 4))]]],
        )
        .ctx("bundle")?;
        NumericBundleConnection::new(&b).ctx("numeric bundle")?
    };
    let pts = vectors(rng, 4, 1, 1.0);
    let d = pts[3][0] - pts[0][0];
    let path = SampledPath::uniform(pts).ctx("path")?;
    let v0: f64 = rng.gen_range(-2.0..2.0);
    let v = parallel_transport(&scalar, &path, &[v0], 100).ctx("transport")?[0];
    let exact = v0 * (-a * d).exp();
    ensure!((v - exact).abs() <= 1e-8, "a = {a}, d = {d}: error {:e}", (v - exact).abs());
    let back = parallel_transport(&scalar, &path.reversed(), &[v], 100).ctx("transport")?[0];
    ensure!((back - v0).abs() <= 1e-8, "forward then back: error {:e}", (back - v0).abs());

    // concatenation and linearity in dimension 2, rank 2
    let bundle = small_bundle(rng, 2, 2)?;
    let first = vectors(rng, 3, 2, 0.8);
    let mut second = vectors(rng, 3, 2, 0.8);
    second[0] = first[2].clone();
    let p1 = SampledPath::uniform(first).ctx("path")?;
    let p2 = SampledPath::uniform(second).ctx("path")?;
    let m1 = transport_matrix(&bundle, &p1, 100).ctx("transport")?;
    let m2 = transport_matrix(&bundle, &p2, 100).ctx("transport")?;
    let m12 = transport_matrix(&bundle, &p1.concat(&p2).ctx("concat")?, 100).ctx("transport")?;
    let e = (&m2 * &m1 - &m12).amax();
    ensure!(e <= 1e-7, "transport along a concatenation: error {e:e}");
    let w = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    let tw = parallel_transport(&bundle, &p1, &w, 100).ctx("transport")?;
    let lin = &m1 * nalgebra::DVector::from_column_slice(&w);
    let e = (0..2).map(|i| (tw[i] - lin[i]).abs()).fold(0.0, f64::max);
    ensure!(e <= 1e-12, "transport is not linear: error {e:e}");
    Ok(())
}

fn trivialization(rng: &mut ChaCha8Rng) -> CaseResult {
    let dim = rng.gen_range(1..=2);
    let rank = rng.gen_range(1..=2);
    let tm = small_connection(rng, dim)?;
    let bundle = small_bundle(rng, dim, rank)?;
    let grid = line_grid(8);
    let f = DiscreteMap::new(grid.clone(), vectors(rng, 8, dim, 0.5)).ctx("map")?;
    let eta = DiscreteSection::new(grid.clone(), vectors(rng, 8, dim, 0.3)).ctx("section")?;
    let direct = trivialize_over_chart(&f, &eta, &tm, &bundle, (0.0, 1.0), 200).ctx("trivialize")?;
    let first = trivialize_over_chart(&f, &eta, &tm, &bundle, (0.0, 0.5), 100).ctx("trivialize")?;
    let second = trivialize_over_chart(&f, &eta, &tm, &bundle, (0.5, 1.0), 100).ctx("trivialize")?;
    for (p, ((d, a), b)) in direct.iter().zip(&first).zip(&second).enumerate() {
        let e = (b * a - d).amax();
        ensure!(e <= 1e-7, "point {p}: [1/2, 1] after [0, 1/2] differs from [0, 1] by {e:e}");
    }
    let still = trivialize_over_chart(&f, &DiscreteSection::zero(&grid, dim), &tm, &bundle, (0.0, 1.0), 50)
        .ctx("trivialize")?;
    let id = nalgebra::DMatrix::<f64>::identity(rank, rank);
    ensure!(still.iter().all(|m| *m == id), "zero displacement gives a non-identity transport");
    Ok(())
}

fn tangent(rng: &mut ChaCha8Rng) -> CaseResult {
    let (c, conn) = constant_connection(rng.gen_range(1..=6), 4)?;
    let grid = line_grid(16);
    let f = DiscreteMap::new(grid.clone(), vectors(rng, 16, 1, 0.5)).ctx("map")?;
    let eta = DiscreteSection::new(grid, vectors(rng, 16, 1, 1.0)).ctx("section")?;
    let approx = tangent_check(&f, &eta, &conn, 1e-4, 200).ctx("tangent check")?;
    let e = sup_distance(&approx.vectors, &eta.vectors);
    ensure!(e <= 1e-6, "c = {c}: error {e:e}");
    Ok(())
}
