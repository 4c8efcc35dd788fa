//! Milnor link-homotopy invariants of pure braids: Artin action on the free
//! group, longitudes, Magnus expansion, and weight systems of chord diagrams
//! by skein resolution.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::diagrams::{Diagram, VertexKind};
use crate::error::MilnorError;

/// A freely reduced word in generators `x_1..x_m`. Letters are
/// `(generator, exponent)` with exponent `+1` or `-1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FreeWord {
    letters: Vec<(usize, i8)>,
}

impl FreeWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn generator(i: usize) -> Self {
        FreeWord { letters: vec![(i, 1)] }
    }

    /// Reduces the given letters. Exponents other than `±1` are expanded.
    pub fn from_letters<I: IntoIterator<Item = (usize, i32)>>(letters: I) -> Self {
        let mut w = FreeWord::identity();
        for (g, e) in letters {
            let unit = e.signum() as i8;
            for _ in 0..e.unsigned_abs() {
                w.push(g, unit);
            }
        }
        w
    }

    fn push(&mut self, g: usize, e: i8) {
        if self.letters.last() == Some(&(g, -e)) {
            self.letters.pop();
        } else {
            self.letters.push((g, e));
        }
    }

    pub fn letters(&self) -> &[(usize, i8)] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        FreeWord { letters: self.letters.iter().rev().map(|&(g, e)| (g, -e)).collect() }
    }

    pub fn mul(&self, other: &FreeWord) -> Self {
        let mut out = self.clone();
        for &(g, e) in &other.letters {
            out.push(g, e);
        }
        out
    }

    /// Total exponent of generator `g`.
    pub fn exponent_sum(&self, g: usize) -> i64 {
        self.letters.iter().filter(|l| l.0 == g).map(|l| l.1 as i64).sum()
    }

    pub fn max_generator(&self) -> usize {
        self.letters.iter().map(|l| l.0).max().unwrap_or(0)
    }

    /// Replace every generator by its image.
    fn substitute(&self, image: &dyn Fn(usize) -> FreeWord) -> Self {
        let mut out = FreeWord::identity();
        for &(g, e) in &self.letters {
            let w = image(g);
            let w = if e > 0 { w } else { w.inverse() };
            out = out.mul(&w);
        }
        out
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|&(g, e)| if e > 0 { format!("x{g}") } else { format!("x{g}^-1") })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Word in the pure braid generators `A(i, j)^{±1}`, `i < j`, on `strands`
/// strands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureBraid {
    pub strands: usize,
    pub word: Vec<(usize, usize, i8)>,
}

impl PureBraid {
    pub fn identity(strands: usize) -> Self {
        PureBraid { strands, word: Vec::new() }
    }

    pub fn new(strands: usize, word: Vec<(usize, usize, i8)>) -> Result<Self, MilnorError> {
        for &(i, j, e) in &word {
            for idx in [i, j] {
                if idx == 0 || idx > strands {
                    return Err(MilnorError::IndexOutOfRange { index: idx, strands });
                }
            }
            if i >= j || e.abs() != 1 {
                return Err(MilnorError::Parse(format!("A({i},{j})^{e}")));
            }
        }
        Ok(PureBraid { strands, word })
    }

    /// Parse whitespace-separated tokens `A(i,j)` and `A(i,j)^-1`.
    pub fn parse(strands: usize, text: &str) -> Result<Self, MilnorError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut rest = compact.as_str();
        let mut word = Vec::new();
        while !rest.is_empty() {
            let bad = || MilnorError::Parse(rest.chars().take(12).collect());
            let body = rest.strip_prefix("A(").ok_or_else(bad)?;
            let close = body.find(')').ok_or_else(bad)?;
            let (i, j) = body[..close].split_once(',').ok_or_else(bad)?;
            let i: usize = i.parse().map_err(|_| bad())?;
            let j: usize = j.parse().map_err(|_| bad())?;
            rest = &body[close + 1..];
            let mut e = 1;
            if let Some(r) = rest.strip_prefix("^-1") {
                e = -1;
                rest = r;
            } else if let Some(r) = rest.strip_prefix("^1") {
                rest = r;
            }
            word.push((i, j, e));
        }
        PureBraid::new(strands, word)
    }

    pub fn inverse(&self) -> Self {
        PureBraid { strands: self.strands, word: self.word.iter().rev().map(|&(i, j, e)| (i, j, -e)).collect() }
    }

    pub fn concat(&self, other: &PureBraid) -> Self {
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        PureBraid { strands: self.strands.max(other.strands), word }
    }

    /// The word in elementary braids `σ_k^{±1}` (as `(k, ±1)`).
    pub fn sigma_word(&self) -> Vec<(usize, i8)> {
        let mut out = Vec::new();
        for &(i, j, e) in &self.word {
            // (σ_{j-1} … σ_{i+1}) σ_i² (σ_{i+1} … σ_{j-1})^{-1}
            let mut g: Vec<(usize, i8)> = (i + 1..j).rev().map(|k| (k, 1)).collect();
            g.push((i, 1));
            g.push((i, 1));
            g.extend((i + 1..j).map(|k| (k, -1)));
            if e < 0 {
                g = g.into_iter().rev().map(|(k, s)| (k, -s)).collect();
            }
            out.extend(g);
        }
        out
    }
}

impl fmt::Display for PureBraid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .word
            .iter()
            .map(|&(i, j, e)| if e > 0 { format!("A({i},{j})") } else { format!("A({i},{j})^-1") })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

fn sigma_image(k: usize, e: i8, g: usize) -> FreeWord {
    let x = FreeWord::generator;
    match (e > 0, g) {
        (true, g) if g == k => x(k).mul(&x(k + 1)).mul(&x(k).inverse()),
        (true, g) if g == k + 1 => x(k),
        (false, g) if g == k => x(k + 1),
        (false, g) if g == k + 1 => x(k + 1).inverse().mul(&x(k)).mul(&x(k + 1)),
        _ => x(g),
    }
}

/// Image of `w` under the braid, applying the elementary substitutions
/// left to right: `σ_k` sends `x_k` to `x_k x_{k+1} x_k^{-1}` and `x_{k+1}`
/// to `x_k`.
pub fn artin_apply(b: &PureBraid, w: &FreeWord) -> Result<FreeWord, MilnorError> {
    if w.max_generator() > b.strands {
        return Err(MilnorError::IndexOutOfRange { index: w.max_generator(), strands: b.strands });
    }
    let mut out = w.clone();
    for (k, e) in b.sigma_word() {
        out = out.substitute(&|g| sigma_image(k, e, g));
    }
    Ok(out)
}

/// Longitudes `λ_1..λ_m`: the braid sends `x_i` to `λ_i x_i λ_i^{-1}`, and
/// `λ_i` is normalized to total `x_i`-exponent zero.
pub fn longitudes(b: &PureBraid) -> Result<Vec<FreeWord>, MilnorError> {
    (1..=b.strands)
        .map(|i| {
            let img = artin_apply(b, &FreeWord::generator(i))?;
            let l = img.letters();
            let k = l.len() / 2;
            if l.len() % 2 == 0 || l[k] != (i, 1) {
                return Err(MilnorError::NotConjugate(i));
            }
            let u = FreeWord { letters: l[..k].to_vec() };
            if u.inverse().letters() != &l[k + 1..] {
                return Err(MilnorError::NotConjugate(i));
            }
            let e = u.exponent_sum(i);
            Ok(u.mul(&FreeWord::from_letters([(i, -e as i32)])))
        })
        .collect()
}

/// Truncated power series in noncommuting `t_1..t_m` with integer
/// coefficients. Monomials are index sequences of length at most `degree`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NcSeries {
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, i64>,
}

impl NcSeries {
    pub fn one(degree: usize) -> Self {
        NcSeries { degree, coeffs: BTreeMap::from([(Vec::new(), 1)]) }
    }

    /// `1 + t_i` for `e = 1`, `1 - t_i + t_i^2 - …` for `e = -1`.
    pub fn letter(i: usize, e: i8, degree: usize) -> Self {
        let mut s = Self::one(degree);
        if e > 0 {
            if degree >= 1 {
                s.coeffs.insert(vec![i], 1);
            }
        } else {
            for k in 1..=degree {
                s.coeffs.insert(vec![i; k], if k % 2 == 0 { 1 } else { -1 });
            }
        }
        s
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficient(&self, monomial: &[usize]) -> i64 {
        self.coeffs.get(monomial).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], i64)> {
        self.coeffs.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn mul(&self, other: &NcSeries) -> NcSeries {
        let degree = self.degree.min(other.degree);
        let mut coeffs: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
        for (a, &ca) in &self.coeffs {
            for (b, &cb) in &other.coeffs {
                if a.len() + b.len() > degree {
                    continue;
                }
                let mut m = a.clone();
                m.extend_from_slice(b);
                *coeffs.entry(m).or_insert(0) += ca * cb;
            }
        }
        coeffs.retain(|_, v| *v != 0);
        NcSeries { degree, coeffs }
    }
}

impl fmt::Display for NcSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, &c) in &self.coeffs {
            let mono = if m.is_empty() { String::new() } else { m.iter().map(|i| format!("t{i}")).collect() };
            let (sign, abs) = if c < 0 { ("-", -c) } else { ("+", c) };
            if !first || c < 0 {
                write!(f, "{}{sign} ", if first { "" } else { " " })?;
            }
            match (abs, mono.is_empty()) {
                (_, true) => write!(f, "{abs}")?,
                (1, false) => write!(f, "{mono}")?,
                _ => write!(f, "{abs}{mono}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Magnus expansion `x_i ↦ 1 + t_i`, truncated above `degree`.
pub fn magnus(w: &FreeWord, degree: usize) -> NcSeries {
    w.letters().iter().fold(NcSeries::one(degree), |acc, &(g, e)| acc.mul(&NcSeries::letter(g, e, degree)))
}

/// Index data of `μ(i_1, …, i_r; j)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MilnorIndex {
    pub upper: Vec<usize>,
    pub target: usize,
}

impl MilnorIndex {
    pub fn new(upper: Vec<usize>, target: usize) -> Result<Self, MilnorError> {
        let mut all = upper.clone();
        all.push(target);
        let mut sorted = all.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != all.len() || upper.is_empty() {
            return Err(MilnorError::RepeatedIndex(all));
        }
        Ok(MilnorIndex { upper, target })
    }

    /// Finite type of the invariant.
    pub fn order(&self) -> usize {
        self.upper.len()
    }

    pub fn indices(&self) -> Vec<usize> {
        let mut v = self.upper.clone();
        v.push(self.target);
        v
    }
}

/// Parses `1,2:3`.
impl FromStr for MilnorIndex {
    type Err = MilnorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MilnorError::Parse(s.to_string());
        let (up, t) = s.split_once(':').ok_or_else(bad)?;
        let upper = up.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<Vec<usize>, _>>()?;
        let target = t.trim().parse().map_err(|_| bad())?;
        MilnorIndex::new(upper, target)
    }
}

impl fmt::Display for MilnorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let u: Vec<String> = self.upper.iter().map(|i| i.to_string()).collect();
        write!(f, "{}:{}", u.join(","), self.target)
    }
}

/// `μ(i_1, …, i_r; j)`: the coefficient of `t_{i_1} ⋯ t_{i_r}` in the Magnus
/// expansion of the `j`-th longitude.
pub fn mu(b: &PureBraid, index: &MilnorIndex) -> Result<i64, MilnorError> {
    for &i in index.indices().iter() {
        if i == 0 || i > b.strands {
            return Err(MilnorError::IndexOutOfRange { index: i, strands: b.strands });
        }
    }
    let lam = longitudes(b)?;
    Ok(magnus(&lam[index.target - 1], index.order()).coefficient(&index.upper))
}

/// Product of Milnor invariants; the empty product is the constant 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MilnorProduct {
    pub factors: Vec<MilnorIndex>,
}

impl MilnorProduct {
    pub fn single(i: MilnorIndex) -> Self {
        MilnorProduct { factors: vec![i] }
    }

    pub fn order(&self) -> usize {
        self.factors.iter().map(|f| f.order()).sum()
    }

    pub fn evaluate(&self, b: &PureBraid) -> Result<i64, MilnorError> {
        let lam = longitudes(b)?;
        let mut v = 1;
        for f in &self.factors {
            for &i in f.indices().iter() {
                if i == 0 || i > b.strands {
                    return Err(MilnorError::IndexOutOfRange { index: i, strands: b.strands });
                }
            }
            v *= magnus(&lam[f.target - 1], f.order()).coefficient(&f.upper);
        }
        Ok(v)
    }
}

/// Parses `1,2:3*1:2`.
impl FromStr for MilnorProduct {
    type Err = MilnorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let factors = s.split('*').map(|f| f.parse()).collect::<Result<Vec<MilnorIndex>, _>>()?;
        Ok(MilnorProduct { factors })
    }
}

/// A chord of a chord diagram: its two segments (ascending) and positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Chord {
    ends: [(usize, usize); 2],
}

fn chords_of(d: &Diagram) -> Result<Vec<Chord>, MilnorError> {
    if !d.is_chord_diagram() {
        return Err(MilnorError::NotChordDiagram);
    }
    let layout = d.layout()?;
    let mut out = Vec::new();
    for &(a, b) in &d.edges {
        let place = |v: u32| match layout.kinds[v as usize - 1] {
            VertexKind::Segment { segment, position } => Ok((segment + 1, position)),
            VertexKind::Free => Err(MilnorError::NotChordDiagram),
        };
        let mut ends = [place(a)?, place(b)?];
        ends.sort();
        if ends[0].0 == ends[1].0 {
            return Err(MilnorError::NotChordDiagram);
        }
        out.push(Chord { ends });
    }
    Ok(out)
}

/// Whether `order` lists every chord once, consistently with the order of
/// legs along each segment.
fn is_linear_extension(chords: &[Chord], order: &[usize]) -> bool {
    let mut seen = vec![false; chords.len()];
    for &c in order {
        if c >= chords.len() || seen[c] {
            return false;
        }
        seen[c] = true;
    }
    if seen.iter().any(|s| !s) {
        return false;
    }
    let mut pos = vec![0; chords.len()];
    for (k, &c) in order.iter().enumerate() {
        pos[c] = k;
    }
    for a in 0..chords.len() {
        for b in 0..chords.len() {
            for ea in chords[a].ends {
                for eb in chords[b].ends {
                    if ea.0 == eb.0 && ea.1 < eb.1 && pos[a] > pos[b] {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Lexicographic order by (lowest segment, position), repaired into a
/// linear extension of the segment orders when that order is not one.
fn default_interleaving(chords: &[Chord]) -> Result<Vec<usize>, MilnorError> {
    let n = chords.len();
    let mut before = vec![Vec::new(); n];
    for a in 0..n {
        for b in 0..n {
            let precedes = chords[a].ends.iter().any(|ea| chords[b].ends.iter().any(|eb| ea.0 == eb.0 && ea.1 < eb.1));
            if precedes {
                before[b].push(a);
            }
        }
    }
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n)
            .filter(|&c| !placed[c] && before[c].iter().all(|&p| placed[p]))
            .min_by_key(|&c| chords[c].ends[0])
            .ok_or(MilnorError::NotBraidRealizable)?;
        placed[next] = true;
        order.push(next);
    }
    Ok(order)
}

/// Weight of a chord diagram under a product of Milnor invariants: the chords,
/// in the given global order, become double points of a singular pure braid,
/// and the value is the alternating sum over all resolutions (each chord on
/// segments `i < j` either inserts `A(i, j)` or nothing).
///
/// A diagram leaving one of the invariant's strands untouched evaluates to 0,
/// since that strand splits off every resolution.
pub fn weight_on_chord_diagram(
    inv: &MilnorProduct,
    d: &Diagram,
    interleaving: Option<&[usize]>,
) -> Result<i64, MilnorError> {
    let chords = chords_of(d)?;
    let n = chords.len();
    if inv.order() < n {
        return Err(MilnorError::TypeTooLow { invariant: inv.order(), order: n });
    }
    for f in &inv.factors {
        for &i in f.indices().iter() {
            if i == 0 || i > d.m {
                return Err(MilnorError::IndexOutOfRange { index: i, strands: d.m });
            }
        }
    }
    let order = match interleaving {
        Some(o) if is_linear_extension(&chords, o) => o.to_vec(),
        Some(_) => return Err(MilnorError::BadInterleaving),
        None => {
            let touched = |s: usize| chords.iter().any(|c| c.ends.iter().any(|e| e.0 == s));
            if inv.factors.iter().flat_map(|f| f.indices()).any(|i| !touched(i)) {
                return Ok(0);
            }
            default_interleaving(&chords)?
        }
    };
    let values: Vec<Result<i64, MilnorError>> = (0u64..1 << n)
        .into_par_iter()
        .map(|mask| {
            let word = order
                .iter()
                .filter(|&&c| mask & (1 << c) != 0)
                .map(|&c| (chords[c].ends[0].0, chords[c].ends[1].0, 1))
                .collect();
            let b = PureBraid { strands: d.m, word };
            let sign = if (n - mask.count_ones() as usize).is_multiple_of(2) { 1 } else { -1 };
            Ok(sign * inv.evaluate(&b)?)
        })
        .collect();
    values.into_iter().sum()
}

/// Every linear extension of the segment orders of a chord diagram.
pub fn interleavings(d: &Diagram) -> Result<Vec<Vec<usize>>, MilnorError> {
    let chords = chords_of(d)?;
    fn rec(chords: &[Chord], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == chords.len() {
            out.push(cur.clone());
            return;
        }
        for c in 0..chords.len() {
            if cur.contains(&c) {
                continue;
            }
            cur.push(c);
            let partial_ok = {
                // Prefix is consistent iff nothing after it must precede it.
                cur.iter().all(|&a| {
                    (0..chords.len()).filter(|b| !cur.contains(b)).all(|b| {
                        !chords[b].ends.iter().any(|eb| chords[a].ends.iter().any(|ea| ea.0 == eb.0 && eb.1 < ea.1))
                    })
                })
            };
            if partial_ok {
                rec(chords, cur, out);
            }
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&chords, &mut Vec::new(), &mut out);
    Ok(out)
}

/// Dimensions of the degree-`n` part of the polynomial algebra on distinct-
/// index Milnor invariants of `m` strands, filtered by excess: a label set of
/// size `l` carries `(l - 2)!` independent invariants of degree `l - 1` and
/// excess `l - 2`. Entry `k` counts monomials of total excess at most `k`,
/// for `k = 0..n`.
pub fn monomial_filtration_dims(n: usize, m: usize) -> Vec<usize> {
    // gf[w][e]: monomials of degree w and excess e.
    let mut gf = vec![vec![0usize; n]; n + 1];
    gf[0][0] = 1;
    for l in 2..=m.min(n + 1) {
        let sets = binomial(m, l);
        let per_set = (1..=l - 2).product::<usize>();
        let (w, e) = (l - 1, l - 2);
        for _ in 0..sets * per_set {
            // One generator of degree w, excess e: multiply by 1/(1 - x^w y^e).
            for deg in w..=n {
                for ex in e..n {
                    gf[deg][ex] += gf[deg - w][ex - e];
                }
            }
        }
    }
    let mut acc = 0;
    gf[n].iter().map(|&c| {
        acc += c;
        acc
    }).collect()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
