use linkgraph::acceptance::fixtures::{alpha_123, alpha_indeterminacy, congruent};
use linkgraph::diagrams::{enumerate_chord, Diagram, LinComb};
use linkgraph::exactla::rat;
use linkgraph::milnor::*;
use linkgraph::relations::{chord_lie_sign, extend_weight_system};
use linkgraph::MilnorError;
use proptest::prelude::*;

fn braid(m: usize, s: &str) -> PureBraid {
    PureBraid::parse(m, s).unwrap()
}

fn idx(s: &str) -> MilnorIndex {
    s.parse().unwrap()
}

fn borromean() -> PureBraid {
    braid(3, "A(1,3) A(2,3) A(1,3)^-1 A(2,3)^-1")
}

fn pairs(m: usize) -> Vec<MilnorIndex> {
    let mut out = Vec::new();
    for i in 1..=m {
        for j in 1..=m {
            if i != j {
                out.push(MilnorIndex::new(vec![i], j).unwrap());
            }
        }
    }
    out
}

#[test]
fn identity_has_vanishing_invariants() {
    let b = PureBraid::identity(4);
    for i in pairs(4) {
        assert_eq!(mu(&b, &i).unwrap(), 0);
    }
    assert_eq!(mu(&b, &idx("1,2,3:4")).unwrap(), 0);
}

#[test]
fn clasp_linking() {
    let b = braid(2, "A(1,2)");
    assert_eq!(mu(&b, &idx("1:2")).unwrap(), 1);
    assert_eq!(mu(&b.inverse(), &idx("1:2")).unwrap(), -1);
    let b3 = braid(3, "A(1,2) A(1,3) A(1,3)");
    assert_eq!(mu(&b3, &idx("1:3")).unwrap(), 2);
    assert_eq!(mu(&b3, &idx("3:1")).unwrap(), 2);
    assert_eq!(mu(&b3, &idx("2:3")).unwrap(), 0);
}

#[test]
fn borromean_triple_linking() {
    let b = borromean();
    for i in pairs(3) {
        assert_eq!(mu(&b, &i).unwrap(), 0, "{i}");
    }
    assert_eq!(mu(&b, &idx("1,2:3")).unwrap().abs(), 1);
    // Swapping the upper indices negates a triple linking number.
    assert_eq!(mu(&b, &idx("1,2:3")).unwrap(), -mu(&b, &idx("2,1:3")).unwrap());
    let lam = longitudes(&b).unwrap();
    assert_eq!(lam[2].exponent_sum(1), 0);
    assert_eq!(lam[2].exponent_sum(2), 0);
}

#[test]
fn borromean_sign_is_pinned() {
    assert_eq!(mu(&borromean(), &idx("1,2:3")).unwrap(), 1);
}

#[test]
fn repeated_indices_are_rejected() {
    assert!(matches!(MilnorIndex::new(vec![1, 1], 2), Err(MilnorError::RepeatedIndex(_))));
    assert!(matches!("1,3:3".parse::<MilnorIndex>(), Err(MilnorError::RepeatedIndex(_))));
}

#[test]
fn triple_linking_weight_system() {
    let inv = MilnorProduct::single(idx("1,2:3"));
    let mut chord_part = LinComb::new();
    for k in enumerate_chord(2, 3) {
        let w = weight_on_chord_diagram(&inv, &k.to_diagram(), None).unwrap();
        chord_part.add_key(k.clone(), rat(w * chord_lie_sign(&k).unwrap() as i64));
    }
    let full = extend_weight_system(2, 3, &chord_part).expect("weights satisfy STU");
    // Exactly one global sign matches.
    let matching: Vec<i64> = [1, -1]
        .into_iter()
        .filter(|&e| congruent(&full, &alpha_123().scaled(&rat(e)), &alpha_indeterminacy()))
        .collect();
    assert_eq!(matching.len(), 1, "weights {full}");
}

#[test]
fn weights_do_not_depend_on_interleaving() {
    let invariants: Vec<MilnorProduct> = vec![
        MilnorProduct::single(idx("1,2:3")),
        MilnorProduct::single(idx("2,1:3")),
        MilnorProduct::single(idx("1,3:2")),
        "1:2*2:3".parse().unwrap(),
        "1:3*1:3".parse().unwrap(),
    ];
    for k in enumerate_chord(2, 3) {
        let d = k.to_diagram();
        let orders = interleavings(&d).unwrap();
        for inv in &invariants {
            let values: Vec<i64> = orders
                .iter()
                .map(|o| weight_on_chord_diagram(inv, &d, Some(o)).unwrap())
                .collect();
            assert!(values.windows(2).all(|w| w[0] == w[1]), "{k}: {values:?}");
            if let Ok(v) = weight_on_chord_diagram(inv, &d, None) {
                assert!(values.is_empty() || v == values[0]);
            }
        }
    }
}

#[test]
fn bad_interleaving_is_rejected() {
    let inv = MilnorProduct::single(idx("1,2:3"));
    let d = Diagram::from_chords(3, &[(1, 2), (1, 3)]);
    assert_eq!(weight_on_chord_diagram(&inv, &d, Some(&[1, 0])), Err(MilnorError::BadInterleaving));
    assert_eq!(weight_on_chord_diagram(&inv, &d, Some(&[0])), Err(MilnorError::BadInterleaving));
    assert!(weight_on_chord_diagram(&inv, &d, Some(&[0, 1])).is_ok());
}

fn arb_braid(m: usize, len: usize) -> impl Strategy<Value = PureBraid> {
    let gen = (1..m).prop_flat_map(move |i| (Just(i), i + 1..=m, prop_oneof![Just(1i8), Just(-1i8)]));
    prop::collection::vec(gen, 0..=len).prop_map(move |word| PureBraid::new(m, word).unwrap())
}

fn arb_word(m: usize, len: usize) -> impl Strategy<Value = FreeWord> {
    prop::collection::vec((1..=m, prop::bool::ANY), 0..=len)
        .prop_map(|l| FreeWord::from_letters(l.into_iter().map(|(g, inv)| (g, if inv { -1 } else { 1 }))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn magnus_is_multiplicative(u in arb_word(3, 8), v in arb_word(3, 8), n in 1usize..=4) {
        prop_assert_eq!(magnus(&u.mul(&v), n), magnus(&u, n).mul(&magnus(&v, n)));
    }

    #[test]
    fn artin_action_is_a_homomorphism(b in arb_braid(4, 5), u in arb_word(4, 6), v in arb_word(4, 6)) {
        let lhs = artin_apply(&b, &u.mul(&v)).unwrap();
        let rhs = artin_apply(&b, &u).unwrap().mul(&artin_apply(&b, &v).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn canceling_pairs_do_not_change_mu(b in arb_braid(4, 5), pos in 0usize..6, g in (1usize..4, 2usize..=4)) {
        let (i, j) = (g.0.min(g.1 - 1), g.1);
        let mut word = b.word.clone();
        let p = pos.min(word.len());
        word.insert(p, (i, j, 1));
        word.insert(p + 1, (i, j, -1));
        let padded = PureBraid::new(4, word).unwrap();
        for index in ["1:2", "3:1", "1,2:3", "2,4:1", "1,2,3:4"] {
            let index = idx(index);
            prop_assert_eq!(mu(&b, &index).unwrap(), mu(&padded, &index).unwrap());
        }
    }

    #[test]
    fn braid_inverse_undoes_action(b in arb_braid(3, 5), w in arb_word(3, 6)) {
        let there = artin_apply(&b, &w).unwrap();
        prop_assert_eq!(artin_apply(&b.inverse(), &there).unwrap(), w);
    }
}
