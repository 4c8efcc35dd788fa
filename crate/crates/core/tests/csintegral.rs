use linkgraph::csintegral::*;
use linkgraph::diagrams::{canonicalize, lie_to_integration, Diagram, LieDiagram, LinComb};
use linkgraph::exactla::rat;
use linkgraph::milnor::{mu, MilnorIndex, PureBraid};
use linkgraph::relations::complete_tree_to_cocycle;
use linkgraph::IntegralError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn link(m: usize, word: &str) -> PolyLink {
    PolyLink::from_braid(&PureBraid::parse(m, word).unwrap())
}

fn borromean() -> PolyLink {
    link(3, "A(1,3) A(2,3) A(1,3)^-1 A(2,3)^-1")
}

fn alpha() -> LinComb {
    let (td, ts) = lie_to_integration(&LieDiagram::tripod()).unwrap();
    let (tk, tcs) = canonicalize(&td).unwrap();
    let tree = LinComb::from_key(tk, rat(-(ts * tcs) as i64));
    complete_tree_to_cocycle(2, 3, &tree).unwrap().cocycle
}

fn perturbed(l: &PolyLink, amount: f64, seed: u64) -> PolyLink {
    l.jittered(amount, seed).unwrap()
}

#[test]
fn clasp_integrates_to_one() {
    let l = link(2, "A(1,2)");
    assert_eq!(exact_linking(&l, 1, 2).unwrap(), 1);
    let e = integrate_diagram(&Diagram::chord(2, 1, 2), &l, 1_000_000, 42).unwrap();
    assert!((e.value - 1.0).abs() < 0.05, "{e:?}");
    assert!(e.std_error > 0.0 && e.std_error < 0.02);
}

#[test]
fn split_pairs() {
    let parallel = link(2, "");
    assert_eq!(exact_linking(&parallel, 1, 2).unwrap(), 0);
    let unlinked = link(2, "A(1,2) A(1,2)^-1");
    assert_eq!(exact_linking(&unlinked, 1, 2).unwrap(), 0);
    let e = integrate_diagram(&Diagram::chord(2, 1, 2), &perturbed(&unlinked, 0.1, 3), 200_000, 5).unwrap();
    assert!(e.value.abs() <= 3.0 * e.std_error, "{e:?}");
}

#[test]
fn edge_reversal_negates_exactly() {
    let l = borromean();
    let t = Diagram::tripod(3, 1, 2, 3);
    let mut flipped = t.clone();
    flipped.edges[1] = (flipped.edges[1].1, flipped.edges[1].0);
    let a = integrate_diagram(&t, &l, 50_000, 11).unwrap();
    let b = integrate_diagram(&flipped, &l, 50_000, 11).unwrap();
    assert_eq!(a.value, -b.value);
    assert_eq!(a.std_error, b.std_error);
    let c = integrate_diagram(&t.clone().with_sign(-1), &l, 50_000, 11).unwrap();
    assert_eq!(a.value, -c.value);
}

#[test]
fn translation_is_bit_exact() {
    let l = borromean();
    let moved = l.translated([3.0, -7.0, 128.0]);
    for d in [Diagram::tripod(3, 1, 2, 3), Diagram::from_chords(3, &[(1, 2), (1, 3)])] {
        let a = integrate_diagram(&d, &l, 20_000, 1).unwrap();
        let b = integrate_diagram(&d, &moved, 20_000, 1).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn thread_count_does_not_matter() {
    let l = borromean();
    let d = Diagram::tripod(3, 1, 2, 3);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| integrate_diagram(&d, &l, 3 * BLOCK + 17, 99).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn cocycle_estimate_is_linear() {
    let l = borromean();
    let a = alpha();
    let (first, rest): (Vec<_>, Vec<_>) = a.iter().enumerate().partition(|(i, _)| i % 2 == 0);
    let c1: LinComb = first.into_iter().map(|(_, (k, v))| (k.clone(), v.clone())).collect();
    let c2: LinComb = rest.into_iter().map(|(_, (k, v))| (k.clone(), v.clone())).collect();
    let e = integrate_cocycle(&a, &l, 20_000, 4).unwrap();
    let e1 = integrate_cocycle(&c1, &l, 20_000, 4).unwrap();
    let e2 = integrate_cocycle(&c2, &l, 20_000, 4).unwrap();
    assert!((e.value - (e1.value + e2.value)).abs() < 1e-12);
    let doubled = integrate_cocycle(&a.scaled(&rat(2)), &l, 20_000, 4).unwrap();
    assert!((doubled.value - 2.0 * e.value).abs() < 1e-12);
}

#[test]
fn error_shrinks_like_square_root() {
    let l = link(2, "A(1,2)");
    let d = Diagram::chord(2, 1, 2);
    let mut ratio = 0.0;
    for seed in 0..20 {
        let small = integrate_diagram(&d, &l, 8 * BLOCK, seed).unwrap();
        let large = integrate_diagram(&d, &l, 16 * BLOCK, seed + 1000).unwrap();
        ratio += small.std_error / large.std_error / 20.0;
    }
    assert!((ratio - 2f64.sqrt()).abs() < 0.15, "mean ratio {ratio}");
}

#[test]
fn exact_linking_matches_gauss_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..25 {
        let len = rng.gen_range(0..=3);
        let word: Vec<&str> = (0..len).map(|_| if rng.gen() { "A(1,2)" } else { "A(1,2)^-1" }).collect();
        let l = perturbed(&link(2, &word.join(" ")), 0.1, trial);
        let exact = exact_linking(&l, 1, 2).unwrap();
        let e = integrate_diagram(&Diagram::chord(2, 1, 2), &l, 100_000, trial).unwrap();
        assert!((e.value - exact as f64).abs() <= 3.0 * e.std_error, "trial {trial}: {exact} vs {e:?}");
    }
}

#[test]
fn pairwise_mu_is_the_linking_number() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let m = rng.gen_range(2..=4);
        let len = rng.gen_range(0..=6);
        let word = (0..len)
            .map(|_| {
                let i = rng.gen_range(1..m);
                let j = rng.gen_range(i + 1..=m);
                (i, j, if rng.gen() { 1 } else { -1 })
            })
            .collect();
        let b = PureBraid::new(m, word).unwrap();
        let l = PolyLink::from_braid(&b);
        for i in 1..=m {
            for j in 1..=m {
                if i != j {
                    let index = MilnorIndex::new(vec![i], j).unwrap();
                    assert_eq!(mu(&b, &index).unwrap(), exact_linking(&l, i, j).unwrap(), "{b} ({i};{j})");
                }
            }
        }
    }
}

#[test]
fn alpha_on_split_link_vanishes() {
    let l = perturbed(&link(3, "A(1,2) A(1,2)^-1 A(2,3)^-1 A(2,3)"), 0.05, 8);
    let e = integrate_cocycle(&alpha(), &l, 200_000, 21).unwrap();
    assert!(e.value.abs() <= 3.0 * e.std_error, "{e:?}");
}

#[test]
fn homotopic_realizations_agree() {
    let a = integrate_cocycle(&alpha(), &borromean(), 400_000, 5).unwrap();
    let b = integrate_cocycle(&alpha(), &perturbed(&borromean(), 0.08, 77), 400_000, 6).unwrap();
    let sigma = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.value - b.value).abs() <= 3.0 * sigma, "{a:?} vs {b:?}");
}

#[test]
fn json_round_trip() {
    let l = borromean();
    let back = PolyLink::from_json(&l.to_json()).unwrap();
    assert_eq!(back, l);
    assert!(l.to_json().contains("\"dirIn\""));
    let e = integrate_diagram(&Diagram::chord(3, 1, 2), &l, 1000, 3).unwrap();
    let v: serde_json::Value = serde_json::to_value(e).unwrap();
    assert!(v.get("stderr").is_some());
    assert_eq!(serde_json::from_value::<IntegralEstimate>(v).unwrap(), e);
}

#[test]
fn invalid_inputs() {
    let l = link(2, "A(1,2)");
    assert_eq!(integrate_diagram(&Diagram::chord(3, 1, 3), &l, 10, 0), Err(IntegralError::StrandOutOfRange { segment: 3, strands: 2 }));
    let four_valent = Diagram::new(2, vec![vec![1], vec![2, 3]], vec![4], vec![(1, 4), (2, 4), (3, 4)]);
    assert!(integrate_diagram(&four_valent, &l, 10, 0).is_err());
    let d = Diagram::new(2, vec![vec![1], vec![2]], vec![], vec![(1, 2), (1, 2)]);
    assert!(matches!(integrate_diagram(&d, &l, 10, 0), Err(IntegralError::NotTrivalent)));
    let mut bad = l.clone();
    bad.strands[1] = bad.strands[0].clone();
    assert!(PolyLink::new(bad.strands).is_err());
    assert!(PolyLink::from_json("{\"strands\":[]}").is_err());
    assert!(exact_linking(&l, 1, 3).is_err());
}
