//! The acceptance suite, shared by the `acceptance` test target and the
//! `check` subcommand. Every criterion reports a pass flag, a one-line
//! detail and its running time against its time budget.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_traits::Zero;
use serde::Serialize;

use crate::csintegral::{exact_linking, integrate_cocycle, integrate_diagram, PolyLink};
use crate::dgalgebra::{differential, differential_comb, is_cocycle, shuffle_oriented};
use crate::diagrams::{
    automorphism_count, canonicalize, enumerate_chord, enumerate_trees, enumerate_trivalent, lie_to_integration,
    CanonicalKey, Diagram, LieDiagram, LinComb,
};
use crate::exactla::{rat, Rational, Subspace};
use crate::milnor::{monomial_filtration_dims, mu, weight_on_chord_diagram, MilnorIndex, MilnorProduct, PureBraid};
use crate::relations::{
    chord_lie_sign, cocycle_basis, complete_tree_to_cocycle, differential_kernel, extend_weight_system, filtration,
    forest_classes, ihx_combinations, shuffle_span_in, stu_graph_components, tree_cocycle_space, Basis,
};

/// Reusable fixtures.
pub mod fixtures {
    use super::*;

    pub const BORROMEAN_WORD: &str = "A(1,3) A(2,3) A(1,3)^-1 A(2,3)^-1";

    /// The sign of the triple linking number of [`borromean`], frozen once.
    pub const BORROMEAN_MU_123: i64 = 1;

    pub fn clasp() -> PureBraid {
        PureBraid::parse(2, "A(1,2)").expect("valid word")
    }

    pub fn borromean() -> PureBraid {
        PureBraid::parse(3, BORROMEAN_WORD).expect("valid word")
    }

    /// Two strands that clasp and unclasp, nudged off the grid.
    pub fn split_pair() -> PolyLink {
        let b = PureBraid::parse(2, "A(1,2) A(1,2)^-1").expect("valid word");
        PolyLink::from_braid(&b).jittered(0.1, 3).expect("small jitter keeps strands apart")
    }

    /// Canonical key and the sign of the Lie orientation relative to it.
    pub fn lie_chords(chords: &[(usize, usize)]) -> (CanonicalKey, i8) {
        let (k, _) = canonicalize(&Diagram::from_chords(3, chords)).expect("valid chords");
        let s = chord_lie_sign(&k).expect("chord diagram");
        (k, s)
    }

    /// The Lie-oriented tripod on segments 1, 2, 3 as a combination.
    pub fn lie_tripod() -> LinComb {
        let (d, s) = lie_to_integration(&LieDiagram::tripod()).expect("tripod is valid");
        let (k, cs) = canonicalize(&d).expect("tripod is valid");
        LinComb::from_key(k, rat((s * cs) as i64))
    }

    pub const L: [(usize, usize); 2] = [(1, 2), (1, 3)];
    pub const M: [(usize, usize); 2] = [(1, 2), (2, 3)];
    pub const R: [(usize, usize); 2] = [(1, 3), (2, 3)];

    fn lie(chords: &[(usize, usize)]) -> LinComb {
        let (k, s) = lie_chords(chords);
        LinComb::from_key(k, rat(s as i64))
    }

    fn primed(c: [(usize, usize); 2]) -> [(usize, usize); 2] {
        [c[1], c[0]]
    }

    /// `L - M + R - T` in Lie orientations.
    pub fn alpha_123() -> LinComb {
        let mut a = lie(&L);
        a.add_assign(&lie(&M).scaled(&rat(-1)));
        a.add_assign(&lie(&R));
        a.add_assign(&lie_tripod().scaled(&rat(-1)));
        a
    }

    /// `L + L'`, `M + M'`, `R + R'` in Lie orientations.
    pub fn alpha_indeterminacy() -> Vec<LinComb> {
        [L, M, R]
            .into_iter()
            .map(|c| {
                let mut s = lie(&c);
                s.add_assign(&lie(&primed(c)));
                s
            })
            .collect()
    }

    /// The Lie-oriented chord diagrams `L, L', M, M', R, R'`.
    pub fn spanning_chords() -> Vec<CanonicalKey> {
        [L, M, R].into_iter().flat_map(|c| [lie_chords(&c).0, lie_chords(&primed(c)).0]).collect()
    }

    /// The tripod's tree part with coefficient -1, as in `alpha_123`.
    pub fn tripod_tree_part() -> LinComb {
        lie_tripod().scaled(&rat(-1))
    }

    /// Whether `a - b` lies in the span of `span`, computed exactly.
    pub fn congruent(a: &LinComb, b: &LinComb, span: &[LinComb]) -> bool {
        let diff = a.sub(b);
        let mut keys: Vec<CanonicalKey> = diff.keys().chain(span.iter().flat_map(|c| c.keys())).cloned().collect();
        keys.sort();
        keys.dedup();
        let sparse = |c: &LinComb| -> Vec<(usize, Rational)> {
            c.iter().map(|(k, v)| (keys.binary_search(k).expect("key collected"), v.clone())).collect()
        };
        Subspace::span(keys.len(), span.iter().map(sparse)).contains(&sparse(&diff))
    }
}

use fixtures::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    /// Exact suites only.
    Fast,
    /// Exact suites and the Monte Carlo suite.
    Full,
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} criterion {} ({}): {} [{:.2}s of {}s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds,
            self.budget_seconds
        )
    }
}

type Check = fn() -> Result<String, String>;

const CRITERIA: [(u8, &str, u64, Check); 9] = [
    (1, "enumeration anchors", 10, enumeration),
    (2, "tree dimensions", 10, tree_dims),
    (3, "filtration dimensions", 120, filtration_dims),
    (4, "alpha_123 reproduction", 10, alpha_reproduction),
    (5, "DG consistency", 120, dg_consistency),
    (6, "automorphisms and STU graphs", 60, aut_and_stu_graphs),
    (7, "Milnor suite", 10, milnor_suite),
    (8, "Monte Carlo suite", 600, monte_carlo),
    (9, "shuffle span", 300, shuffle_spans),
];

pub const MONTE_CARLO: u8 = 8;

pub fn ids(level: Level) -> Vec<u8> {
    CRITERIA.iter().map(|c| c.0).filter(|&id| level == Level::Full || id != MONTE_CARLO).collect()
}

/// Runs one criterion; `None` for an unknown id.
pub fn run_one(id: u8) -> Option<Outcome> {
    let &(id, name, budget, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed();
    let within = elapsed <= Duration::from_secs(budget);
    let (passed, mut detail) = match result {
        Ok(d) => (within, d),
        Err(d) => (false, d),
    };
    if !within {
        detail.push_str("; over time budget");
    }
    Some(Outcome { id, name, passed, detail, seconds: elapsed.as_secs_f64(), budget_seconds: budget as f64 })
}

/// Runs the criteria of `level` in order, calling `report` after each.
pub fn run(level: Level, mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    ids(level)
        .into_iter()
        .map(|id| {
            let o = run_one(id).expect("listed id");
            report(&o);
            o
        })
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn enumeration() -> Result<String, String> {
    let chords = enumerate_chord(3, 4).into_iter().filter(|k| k.touches_all_segments() && k.is_connected()).count();
    let one_free = enumerate_trivalent(3, 4, 1)
        .into_iter()
        .filter(|k| k.num_free() == 1 && k.touches_all_segments())
        .count();
    let trees = enumerate_trees(&[1, 2, 3, 4], 4).len();
    ensure((chords, one_free, trees) == (72, 24, 3), || {
        format!("order 3 on 4 segments: {chords} chord, {one_free} one-free-vertex, {trees} trees")
    })?;

    let spanning: BTreeSet<CanonicalKey> =
        enumerate_chord(2, 3).into_iter().filter(|k| k.touches_all_segments()).collect();
    let expected: BTreeSet<CanonicalKey> = spanning_chords().into_iter().collect();
    ensure(spanning == expected && expected.len() == 6, || {
        format!("order 2 on 3 segments: {} spanning chord diagrams, expected L, M, R and primes", spanning.len())
    })?;
    let tripods: Vec<CanonicalKey> = enumerate_trivalent(2, 3, 1).into_iter().filter(|k| k.num_free() == 1).collect();
    let tripod = lie_tripod().keys().next().cloned().expect("nonzero");
    ensure(tripods == [tripod], || format!("order 2 on 3 segments: free-vertex diagrams {tripods:?}"))?;
    Ok("72 chord, 24 one-free-vertex, 3 trees; L, M, R, L', M', R' and the tripod".into())
}

fn tree_dims() -> Result<String, String> {
    let mut dims = Vec::new();
    for l in 3..=5 {
        let labels: Vec<usize> = (1..=l).collect();
        dims.push(tree_cocycle_space(&labels, l).map_err(err)?.space.dim());
    }
    ensure(dims == [1, 2, 6], || format!("dims {dims:?}"))?;
    Ok(format!("dims {dims:?} for 3, 4, 5 labels"))
}

fn filtration_dims() -> Result<String, String> {
    let mut parts = Vec::new();
    for ((n, m), want) in [((2, 3), vec![6, 7]), ((3, 4), vec![56, 80, 82])] {
        let got = filtration(n, m).dims();
        let oracle = monomial_filtration_dims(n, m);
        ensure(got == want && oracle == want, || format!("({n}, {m}): computed {got:?}, monomial count {oracle:?}"))?;
        parts.push(format!("({n}, {m}) -> {got:?}"));
    }
    Ok(parts.join(", "))
}

fn alpha_reproduction() -> Result<String, String> {
    let c = complete_tree_to_cocycle(2, 3, &tripod_tree_part()).map_err(err)?;
    ensure(is_cocycle(&c.cocycle).map_err(err)?, || "completion is not closed".into())?;
    ensure(congruent(&c.cocycle, &alpha_123(), &alpha_indeterminacy()), || {
        format!("completion {} is not congruent to L - M + R - T", c.cocycle)
    })?;
    Ok(format!("completion {} congruent to L - M + R - T", c.cocycle))
}

/// Trivalent diagrams of order `1..=n` on `m` segments together with their
/// defect-one differential images.
fn graded_keys(n: usize, m: usize) -> Result<Vec<CanonicalKey>, String> {
    let mut out = BTreeSet::new();
    for order in 1..=n {
        for k in enumerate_trivalent(order, m, order) {
            for (img, _) in differential(&k.to_diagram()).map_err(err)?.iter() {
                out.insert(img.clone());
            }
            out.insert(k);
        }
    }
    Ok(out.into_iter().collect())
}

fn dg_consistency() -> Result<String, String> {
    let mut checked = 0usize;
    for m in 2..=4 {
        for k in graded_keys(3, m)? {
            let dd = differential_comb(&differential(&k.to_diagram()).map_err(err)?).map_err(err)?;
            ensure(dd.is_zero(), || format!("d(d({k})) = {dd}"))?;
            checked += 1;
        }
    }

    let mut pairs = 0usize;
    for m in 2..=4 {
        let keys = graded_keys(2, m)?;
        for a in &keys {
            for b in &keys {
                if a.order() + b.order() > 3 {
                    continue;
                }
                let (da, db) = (a.to_diagram(), b.to_diagram());
                let lhs = differential_comb(&shuffle_oriented(&da, &db).map_err(err)?).map_err(err)?;
                let mut rhs = LinComb::new();
                for (k, c) in differential(&da).map_err(err)?.iter() {
                    rhs.add_scaled(&shuffle_oriented(&k.to_diagram(), &db).map_err(err)?, c);
                }
                let sign = if a.num_vertices() % 2 == 0 { rat(1) } else { rat(-1) };
                for (k, c) in differential(&db).map_err(err)?.iter() {
                    rhs.add_scaled(&shuffle_oriented(&da, &k.to_diagram()).map_err(err)?, &(c * &sign));
                }
                ensure(lhs == rhs, || format!("Leibniz fails for {a} and {b}"))?;
                pairs += 1;
            }
        }
    }

    let mut spaces = 0usize;
    for n in 1..=3 {
        for m in 2..=4 {
            let stu = cocycle_basis(n, m);
            let (basis, dk) = differential_kernel(n, m).map_err(err)?;
            ensure(basis == stu.basis && dk == stu.space, || format!("({n}, {m}): STU kernel differs from d kernel"))?;
            for (i, key) in basis.keys().iter().enumerate() {
                let e = LinComb::from_key(key.clone(), rat(1));
                let in_stu = stu.space.contains(&[(i, rat(1))]);
                ensure(is_cocycle(&e).map_err(err)? == in_stu, || format!("({n}, {m}): {key} disagrees"))?;
            }
            for alpha in stu.elements() {
                ensure(is_cocycle(&alpha).map_err(err)?, || format!("({n}, {m}): STU element {alpha} not closed"))?;
            }
            let ihx = ihx_combinations(basis.keys());
            for alpha in stu.elements() {
                for c in &ihx {
                    let pairing: Rational = c.iter().map(|(k, x)| x * alpha.coefficient(k)).sum();
                    ensure(pairing.is_zero(), || format!("({n}, {m}): {alpha} pairs nontrivially with {c}"))?;
                }
            }
            spaces += 1;
        }
    }
    Ok(format!("d^2 = 0 on {checked} diagrams, Leibniz on {pairs} pairs, STU = d kernel within IHX on {spaces} spaces"))
}

fn aut_and_stu_graphs() -> Result<String, String> {
    let mut diagrams = 0usize;
    let mut classes = 0usize;
    for n in 1..=3 {
        for m in 2..=4 {
            for k in Basis::trivalent(n, m).keys() {
                let a = automorphism_count(&k.to_diagram()).map_err(err)?;
                ensure(a == 1, || format!("{k} has {a} automorphisms"))?;
                diagrams += 1;
            }
            for (class, rep) in forest_classes(n, m) {
                let c = stu_graph_components(&rep.to_diagram(), n, m).map_err(err)?;
                ensure(c == 1, || format!("({n}, {m}) class {class}: {c} components"))?;
                classes += 1;
            }
        }
    }
    Ok(format!("{diagrams} diagrams rigid, {classes} STU graphs connected"))
}

fn index(s: &str) -> MilnorIndex {
    s.parse().expect("fixture index")
}

fn milnor_suite() -> Result<String, String> {
    let id = PureBraid::identity(4);
    for i in 1..=4 {
        for j in 1..=4 {
            if i != j {
                let v = mu(&id, &MilnorIndex::new(vec![i], j).map_err(err)?).map_err(err)?;
                ensure(v == 0, || format!("identity: mu({i};{j}) = {v}"))?;
            }
        }
    }
    for s in ["1,2:3", "1,2,3:4", "2,4,1:3"] {
        let v = mu(&id, &index(s)).map_err(err)?;
        ensure(v == 0, || format!("identity: mu({s}) = {v}"))?;
    }

    let clasp = clasp();
    let lk = exact_linking(&PolyLink::from_braid(&clasp), 1, 2).map_err(err)?;
    let v = mu(&clasp, &index("1:2")).map_err(err)?;
    ensure(v == 1 && lk == 1, || format!("clasp: mu(1;2) = {v}, crossing count {lk}"))?;

    let b = borromean();
    for s in ["1:2", "2:1", "1:3", "3:1", "2:3", "3:2"] {
        let v = mu(&b, &index(s)).map_err(err)?;
        ensure(v == 0, || format!("Borromean: mu({s}) = {v}"))?;
    }
    let triple = mu(&b, &index("1,2:3")).map_err(err)?;
    ensure(triple.abs() == 1, || format!("Borromean: mu(1,2;3) = {triple}"))?;
    ensure(triple == BORROMEAN_MU_123, || format!("Borromean: mu(1,2;3) = {triple} against the frozen sign"))?;

    let inv = MilnorProduct::single(index("1,2:3"));
    let mut chord_part = LinComb::new();
    for k in enumerate_chord(2, 3) {
        let w = weight_on_chord_diagram(&inv, &k.to_diagram(), None).map_err(err)?;
        let s = chord_lie_sign(&k).map_err(err)?;
        chord_part.add_key(k, rat(w * s as i64));
    }
    let full = extend_weight_system(2, 3, &chord_part).ok_or("weights violate STU")?;
    let signs: Vec<i64> = [1, -1]
        .into_iter()
        .filter(|&e| congruent(&full, &alpha_123().scaled(&rat(e)), &alpha_indeterminacy()))
        .collect();
    ensure(signs.len() == 1, || format!("weights {full} match alpha_123 with signs {signs:?}"))?;
    Ok(format!("mu(1,2;3) = {triple}, weights match {}alpha_123", if signs[0] < 0 { "-" } else { "+" }))
}

const CLASP_SAMPLES: u64 = 1_000_000;
const SPLIT_SAMPLES: u64 = 1_000_000;
const BORROMEAN_SAMPLES: u64 = 4_000_000;
const FLIP_SAMPLES: u64 = 100_000;

fn monte_carlo() -> Result<String, String> {
    let chord = Diagram::chord(2, 1, 2);
    let clasp = integrate_diagram(&chord, &PolyLink::from_braid(&clasp()), CLASP_SAMPLES, 42).map_err(err)?;
    ensure((clasp.value - 1.0).abs() <= 0.05, || format!("clasp {:.4} +- {:.4}", clasp.value, clasp.std_error))?;

    let split = integrate_diagram(&chord, &split_pair(), SPLIT_SAMPLES, 43).map_err(err)?;
    ensure(split.value.abs() <= 3.0 * split.std_error, || {
        format!("split pair {:.4} +- {:.4}", split.value, split.std_error)
    })?;

    let bl = PolyLink::from_braid(&borromean());
    let target = mu(&borromean(), &index("1,2:3")).map_err(err)? as f64;
    let alpha = integrate_cocycle(&alpha_123(), &bl, BORROMEAN_SAMPLES, 44).map_err(err)?;
    let tol = (3.0 * alpha.std_error).min(0.25);
    ensure((alpha.value - target).abs() <= tol, || {
        format!("Borromean alpha {:.4} +- {:.4}, target {target}, tolerance {tol:.4}", alpha.value, alpha.std_error)
    })?;

    let t = Diagram::tripod(3, 1, 2, 3);
    let mut flipped = t.clone();
    flipped.edges[0] = (flipped.edges[0].1, flipped.edges[0].0);
    let a = integrate_diagram(&t, &bl, FLIP_SAMPLES, 45).map_err(err)?;
    let f = integrate_diagram(&flipped, &bl, FLIP_SAMPLES, 45).map_err(err)?;
    ensure(a.value == -f.value && a.std_error == f.std_error, || {
        format!("edge flip {} vs {}", a.value, f.value)
    })?;
    Ok(format!(
        "clasp {:.4} +- {:.4}; split {:.4} +- {:.4}; Borromean alpha {:.4} +- {:.4} vs {target}; edge flip exact",
        clasp.value, clasp.std_error, split.value, split.std_error, alpha.value, alpha.std_error
    ))
}

fn shuffle_spans() -> Result<String, String> {
    let mut checked = Vec::new();
    for n in 1..=3 {
        for m in 2..=4 {
            let filt = filtration(n, m);
            for k in 0..n {
                let s = shuffle_span_in(&filt, k).map_err(err)?;
                ensure(s.spans(), || format!("({n}, {m}) level {k}: {s:?}"))?;
                checked.push(format!("({n},{m},{k})"));
            }
        }
    }
    Ok(format!("{} quotients spanned", checked.len()))
}
