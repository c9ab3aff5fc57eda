use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use superfield::chart::Chart;
use superfield::connection::{BundleConnection, TorsionFreeConnection};
use superfield::random::{self, case_rng, PolyShape};
use superfield::supermap::{
    check_even_degree, curry, diagonal_vanishing_check, morphism_to_section, section_to_morphism, uncurry, OddSplit,
    ParityMode, SuperManifoldPresentation, SuperfieldSection,
};

struct Setup {
    source: SuperManifoldPresentation,
    target: SuperManifoldPresentation,
    gamma: TorsionFreeConnection,
    bundle: BundleConnection,
}

fn chart(name: &str, prefix: &str, dim: usize) -> Chart {
    Chart::new(name, (1..=dim).map(|i| format!("{prefix}{i}"))).unwrap()
}

fn setup(rng: &mut ChaCha8Rng) -> Setup {
    let m = chart("M", "y", rng.gen_range(1..=2));
    let n = chart("N", "x", rng.gen_range(1..=2));
    let source = random::presentation("M", &m, "th", rng.gen_range(0..=3));
    let target = random::presentation("N", &n, "eta", rng.gen_range(0..=2));
    let gamma = random::connection(rng, &n, 1);
    let bundle = random::bundle(rng, &n, target.odd_names().to_vec(), target.degrees().to_vec(), 1);
    Setup { source, target, gamma, bundle }
}

fn random_section(rng: &mut ChaCha8Rng, s: &Setup, mode: ParityMode) -> SuperfieldSection {
    let ft = s.source.chart().function_table();
    let rank = s.source.rank();
    let keep = |even: bool| {
        move |a: &superfield::graded::OddSet| match mode {
            ParityMode::Even => (a.len() % 2 == 0) == even,
            ParityMode::All => true,
        }
    };
    let tangent = (0..s.target.chart().dim())
        .map(|_| {
            let mut t = random::coefficient_table(rng, &ft, rank, 2);
            t.retain(|a, _| !a.is_empty() && keep(true)(a));
            t
        })
        .collect();
    let fiber = (0..s.target.rank())
        .map(|_| {
            let mut t = random::coefficient_table(rng, &ft, rank, 2);
            t.retain(|a, _| keep(false)(a));
            t
        })
        .collect();
    let base_map = (0..s.target.chart().dim()).map(|_| random::poly(rng, &ft, PolyShape::base(3, 2))).collect();
    SuperfieldSection::new(&s.source, &s.target, mode, base_map, tangent, fiber).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn morphism_section_morphism(seed in any::<u64>(), all in any::<bool>()) {
        let rng = &mut case_rng(seed, 0, 0);
        let s = setup(rng);
        let mode = if all { ParityMode::All } else { ParityMode::Even };
        let f = random::morphism(rng, &s.source, &s.target, mode, 2).unwrap();
        let sec = morphism_to_section(&f, &s.gamma, Some(&s.bundle)).unwrap();
        if !all {
            prop_assert!(check_even_degree(&sec));
        }
        prop_assert_eq!(section_to_morphism(&sec, &s.gamma, Some(&s.bundle)).unwrap(), f);
    }

    #[test]
    fn section_morphism_section(seed in any::<u64>(), all in any::<bool>()) {
        let rng = &mut case_rng(seed, 0, 0);
        let s = setup(rng);
        let mode = if all { ParityMode::All } else { ParityMode::Even };
        let sec = random_section(rng, &s, mode);
        let f = section_to_morphism(&sec, &s.gamma, Some(&s.bundle)).unwrap();
        prop_assert_eq!(morphism_to_section(&f, &s.gamma, Some(&s.bundle)).unwrap(), sec);
    }

    #[test]
    fn change_of_connection_is_a_bijection_fixing_the_base(seed in any::<u64>()) {
        let rng = &mut case_rng(seed, 0, 0);
        let s = setup(rng);
        let gamma1 = random::connection(rng, s.target.chart(), 1);
        let bundle1 = random::bundle(rng, s.target.chart(), s.target.odd_names().to_vec(), s.target.degrees().to_vec(), 1);
        let sec0 = random_section(rng, &s, ParityMode::Even);
        let f = section_to_morphism(&sec0, &s.gamma, Some(&s.bundle)).unwrap();
        let sec1 = morphism_to_section(&f, &gamma1, Some(&bundle1)).unwrap();
        prop_assert_eq!(sec1.base_map(), sec0.base_map());
        prop_assert!(check_even_degree(&sec1));
        let back = morphism_to_section(&section_to_morphism(&sec1, &gamma1, Some(&bundle1)).unwrap(), &s.gamma, Some(&s.bundle)).unwrap();
        prop_assert_eq!(back, sec0);
    }

    #[test]
    fn diagonal_lemma(seed in any::<u64>()) {
        let rng = &mut case_rng(seed, 0, 0);
        let s = setup(rng);
        let f = random::morphism(rng, &s.source, &s.target, ParityMode::Even, 2).unwrap();
        let chart = s.target.chart();
        let pair = chart.pair_table().unwrap();
        let mut big_f = random::poly(rng, &pair, PolyShape::base(2, 1));
        for _ in 0..=s.source.rank() {
            let i = rng.gen_range(0..chart.dim());
            let d = superfield::graded::SuperPoly::generator(&pair, &chart.primed_names()[i]).unwrap()
                - superfield::graded::SuperPoly::generator(&pair, &chart.coords()[i]).unwrap();
            big_f = &big_f * &d;
        }
        prop_assert!(diagonal_vanishing_check(&f, &big_f).unwrap().is_zero());
    }

    #[test]
    fn curry_and_uncurry_are_inverse(seed in any::<u64>(), n in 0usize..=6) {
        let rng = &mut case_rng(seed, 0, 0);
        let q = rng.gen_range(0..=n);
        let p = random::permutation(rng, n);
        let split = OddSplit::new(n, p[..q].to_vec(), p[q..].to_vec()).unwrap();
        let ft = Chart::new("P", ["z", "y"]).unwrap().function_table();
        let t = random::coefficient_table(rng, &ft, n, 2);
        let blocks = curry(&t, &split).unwrap();
        prop_assert_eq!(uncurry(&blocks, &split).unwrap(), t);
        prop_assert_eq!(curry(&uncurry(&blocks, &split).unwrap(), &split).unwrap(), blocks);
    }
}

#[test]
fn diagonal_lemma_is_sharp() {
    // A single factor of the diagonal ideal survives a nilpotent shift.
    let m = Chart::new("M", ["y"]).unwrap();
    let n = Chart::new("N", ["x"]).unwrap();
    let src = random::presentation("M", &m, "th", 2);
    let dst = random::presentation("N", &n, "eta", 0);
    let t = src.table(ParityMode::Even).unwrap();
    let x = superfield::io::parse_poly("y + th1*th2", &t).unwrap();
    let f = superfield::supermap::SuperMorphism::new(&src, &dst, ParityMode::Even, vec![x], vec![]).unwrap();
    let pair = n.pair_table().unwrap();
    let d = superfield::io::parse_poly("x' - x", &pair).unwrap();
    assert_eq!(diagonal_vanishing_check(&f, &d).unwrap().to_string(), "th1*th2");
    assert!(diagonal_vanishing_check(&f, &(&d * &d)).unwrap().is_zero());
}
