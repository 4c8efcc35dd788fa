//! Monte Carlo evaluation of configuration space integrals of trivalent
//! diagrams against piecewise-linear string links, and an exact linking
//! number from crossing counts.
//!
//! The sphere form is normalized to total area one, so a single chord
//! integrates to the linking number.

use std::f64::consts::PI;

use rand::distributions::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagrams::{Diagram, LinComb, VertexKind};
use crate::error::IntegralError;
use crate::milnor::PureBraid;

pub type Vec3 = [f64; 3];

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// One strand: points at evenly spaced parameters in `[-1, 1]`, continued
/// affinely by `dir_in` before the first point and `dir_out` after the last.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Strand {
    pub points: Vec<Vec3>,
    pub dir_in: Vec3,
    pub dir_out: Vec3,
}

impl Strand {
    /// Position and velocity at parameter `t`.
    pub fn eval(&self, t: f64) -> (Vec3, Vec3) {
        let n = self.points.len();
        if t <= -1.0 {
            return (add(self.points[0], scale(self.dir_in, t + 1.0)), self.dir_in);
        }
        if t >= 1.0 {
            return (add(self.points[n - 1], scale(self.dir_out, t - 1.0)), self.dir_out);
        }
        let h = 2.0 / (n - 1) as f64;
        let k = (((t + 1.0) / h) as usize).min(n - 2);
        let s = (t + 1.0) / h - k as f64;
        let d = sub(self.points[k + 1], self.points[k]);
        (add(self.points[k], scale(d, s)), scale(d, 1.0 / h))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyLink {
    pub strands: Vec<Strand>,
}

/// Length of the stand-in segments used for tails in distance and crossing
/// checks, relative to the link's extent.
const TAIL_REACH: f64 = 1.0e3;

impl PolyLink {
    pub fn new(strands: Vec<Strand>) -> Result<Self, IntegralError> {
        let link = PolyLink { strands };
        link.check()?;
        Ok(link)
    }

    fn check(&self) -> Result<(), IntegralError> {
        if self.strands.is_empty() {
            return Err(IntegralError::InvalidLink("no strands".into()));
        }
        for (i, s) in self.strands.iter().enumerate() {
            if s.points.len() < 2 {
                return Err(IntegralError::InvalidLink(format!("strand {} needs at least two points", i + 1)));
            }
            if norm(s.dir_in) == 0.0 || norm(s.dir_out) == 0.0 {
                return Err(IntegralError::InvalidLink(format!("strand {} has a zero tail direction", i + 1)));
            }
            let all = s.points.iter().chain([&s.dir_in, &s.dir_out]);
            if all.flat_map(|p| p.iter()).any(|x| !x.is_finite()) {
                return Err(IntegralError::InvalidLink(format!("strand {} has a non-finite coordinate", i + 1)));
            }
        }
        for i in 0..self.strands.len() {
            for j in i + 1..self.strands.len() {
                if self.min_distance(i, j) <= 1e-9 {
                    return Err(IntegralError::InvalidLink(format!("strands {} and {} meet", i + 1, j + 1)));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self, IntegralError> {
        let link: PolyLink = serde_json::from_str(s).map_err(|e| IntegralError::InvalidLink(e.to_string()))?;
        link.check()?;
        Ok(link)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("link serializes")
    }

    pub fn num_strands(&self) -> usize {
        self.strands.len()
    }

    pub fn bbox(&self) -> (Vec3, Vec3) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in self.strands.iter().flat_map(|s| &s.points) {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    pub fn center(&self) -> Vec3 {
        let (lo, hi) = self.bbox();
        scale(add(lo, hi), 0.5)
    }

    fn extent(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (0.5 * norm(sub(hi, lo))).max(1e-9)
    }

    pub fn translated(&self, v: Vec3) -> PolyLink {
        let strands = self
            .strands
            .iter()
            .map(|s| Strand { points: s.points.iter().map(|&p| add(p, v)).collect(), ..s.clone() })
            .collect();
        PolyLink { strands }
    }

    /// Moves every interior point (not the tail anchors) by up to `amount`
    /// in each coordinate; a link homotopy when `amount` is small.
    pub fn jittered(&self, amount: f64, seed: u64) -> Result<PolyLink, IntegralError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut strands = self.strands.clone();
        for s in &mut strands {
            let n = s.points.len();
            for p in &mut s.points[1..n - 1] {
                for x in p.iter_mut() {
                    *x += amount * (2.0 * rng.gen::<f64>() - 1.0);
                }
            }
        }
        PolyLink::new(strands)
    }

    /// The strand as straight pieces, tails cut at a long finite reach.
    fn pieces(&self, i: usize) -> Vec<(Vec3, Vec3)> {
        let s = &self.strands[i];
        let reach = TAIL_REACH * self.extent();
        let first = s.points[0];
        let last = *s.points.last().expect("non-empty");
        let mut out = vec![(sub(first, scale(s.dir_in, reach / norm(s.dir_in))), first)];
        out.extend(s.points.windows(2).map(|w| (w[0], w[1])));
        out.push((last, add(last, scale(s.dir_out, reach / norm(s.dir_out)))));
        out
    }

    /// Least distance between strands `i` and `j` (0-based).
    pub fn min_distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.pieces(i), self.pieces(j));
        let mut best = f64::INFINITY;
        for &(p0, p1) in &a {
            for &(q0, q1) in &b {
                best = best.min(segment_distance(p0, p1, q0, q1));
            }
        }
        best
    }

    /// Geometric realization of a pure braid: strands run upward in `z`
    /// with strand `k` starting at `x = k`, one unit of height per
    /// elementary crossing of the freely reduced `σ`-word. Crossings happen
    /// mid-segment, and all coordinates are multiples of `1/4`.
    pub fn from_braid(b: &PureBraid) -> PolyLink {
        let m = b.strands;
        let mut word: Vec<(usize, i8)> = Vec::new();
        for g in b.sigma_word() {
            if word.last() == Some(&(g.0, -g.1)) {
                word.pop();
            } else {
                word.push(g);
            }
        }
        // slot[p] = strand currently at position p.
        let mut slot: Vec<usize> = (0..m).collect();
        let mut pts: Vec<Vec<Vec3>> = (0..m).map(|k| vec![[k as f64 + 1.0, 0.0, 0.0]]).collect();
        let step = |slot: &[usize], pts: &mut Vec<Vec<Vec3>>, z: f64, moving: Option<(usize, i8)>| {
            for (p, &s) in slot.iter().enumerate() {
                let x = p as f64 + 1.0;
                let (dx, dy) = match moving {
                    Some((k, e)) if p + 1 == k || p == k => {
                        // The strand moving right sits in front (smaller y)
                        // for a positive crossing.
                        let right = p + 1 == k;
                        let front = if right == (e > 0) { -0.25 } else { 0.25 };
                        (if right { 1.0 } else { -1.0 }, front)
                    }
                    _ => (0.0, 0.0),
                };
                pts[s].push([x + 0.25 * dx, dy, z + 0.25]);
                pts[s].push([x + 0.75 * dx, dy, z + 0.75]);
                pts[s].push([x + dx, 0.0, z + 1.0]);
            }
        };
        step(&slot, &mut pts, 0.0, None);
        let mut z = 1.0;
        for (k, e) in word {
            step(&slot, &mut pts, z, Some((k, e)));
            slot.swap(k - 1, k);
            z += 1.0;
        }
        step(&slot, &mut pts, z, None);
        let up = [0.0, 0.0, 1.0];
        let strands = pts.into_iter().map(|points| Strand { points, dir_in: up, dir_out: up }).collect();
        PolyLink { strands }
    }
}

fn segment_distance(p0: Vec3, p1: Vec3, q0: Vec3, q1: Vec3) -> f64 {
    let d1 = sub(p1, p0);
    let d2 = sub(q1, q0);
    let r = sub(p0, q0);
    let a = dot(d1, d1);
    let e = dot(d2, d2);
    let f = dot(d2, r);
    let c = dot(d1, r);
    let b = dot(d1, d2);
    let denom = a * e - b * b;
    let mut s = if denom > 1e-15 * a * e { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    norm(sub(add(p0, scale(d1, s)), add(q0, scale(d2, t))))
}

/// The pulled-back sphere form of one edge: `û · (J_a × J_b) * weight` is
/// its coefficient on `dx_a ∧ dx_b`, where `J` are the derivatives of the
/// edge vector along the coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeFactor {
    pub direction: Vec3,
    pub weight: f64,
}

impl EdgeFactor {
    pub fn coefficient(&self, ja: Vec3, jb: Vec3) -> f64 {
        self.weight * dot(self.direction, cross(ja, jb))
    }
}

/// `None` for coincident points, which lie in the excluded set.
pub fn edge_form_factor(tail: Vec3, head: Vec3) -> Option<EdgeFactor> {
    let u = sub(head, tail);
    let r = norm(u);
    if r == 0.0 || !r.is_finite() {
        return None;
    }
    Some(EdgeFactor { direction: scale(u, 1.0 / r), weight: 1.0 / (4.0 * PI * r * r) })
}

/// Monte Carlo result. `stderr` is the sample standard deviation over
/// `sqrt(samples)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    #[serde(rename = "stderr")]
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Samples per random stream; stream `k` covers sample indices
/// `k * BLOCK .. (k + 1) * BLOCK`, so results do not depend on threading.
pub const BLOCK: u64 = 4096;

/// Radius scale of the neighbor-centered proposal relative to the link's
/// extent.
const NEIGHBOR_SCALE: f64 = 0.25;

/// Per-diagram setup shared by all samples.
struct Plan {
    sign: f64,
    /// Vertex index -> (strand, rank among that strand's vertices) or free.
    kinds: Vec<VertexKind>,
    /// Vertex indices on each strand, in diagram order.
    on_strand: Vec<Vec<usize>>,
    free: Vec<usize>,
    /// Already-placed neighbors of each free vertex, in sampling order.
    free_neighbors: Vec<Vec<usize>>,
    /// First coordinate of each vertex.
    coord: Vec<usize>,
    dim: usize,
    edges: Vec<(usize, usize)>,
    log_factorials: f64,
}

impl Plan {
    fn new(d: &Diagram, link: &PolyLink) -> Result<Plan, IntegralError> {
        if d.defect() != 0 {
            return Err(IntegralError::NotTrivalent);
        }
        let violations = d.validate()?;
        if !violations.is_empty() {
            return Err(IntegralError::Diagram(crate::DiagramError::Invalid { violations }));
        }
        for (s, list) in d.seg_vertices.iter().enumerate() {
            if !list.is_empty() && s >= link.num_strands() {
                return Err(IntegralError::StrandOutOfRange { segment: s + 1, strands: link.num_strands() });
            }
        }
        let layout = d.layout()?;
        let n = layout.kinds.len();
        let mut coord = vec![0; n];
        let mut dim = 0;
        for v in 0..n {
            coord[v] = dim;
            dim += match layout.kinds[v] {
                VertexKind::Segment { .. } => 1,
                VertexKind::Free => 3,
            };
        }
        let on_strand: Vec<Vec<usize>> =
            d.seg_vertices.iter().map(|l| l.iter().map(|&id| id as usize - 1).collect()).collect();
        let mut free: Vec<usize> = (0..n).filter(|&v| layout.kinds[v] == VertexKind::Free).collect();
        let mut placed: Vec<bool> = layout.kinds.iter().map(|k| *k != VertexKind::Free).collect();
        // Place free vertices adjacent to placed ones first.
        let mut order = Vec::with_capacity(free.len());
        while !free.is_empty() {
            let pick = free.iter().position(|&f| layout.adj[f].iter().any(|&u| placed[u])).unwrap_or(0);
            let f = free.remove(pick);
            placed[f] = true;
            order.push(f);
        }
        let mut seen: Vec<bool> = layout.kinds.iter().map(|k| *k != VertexKind::Free).collect();
        let mut free_neighbors = Vec::new();
        for &f in &order {
            let mut nb: Vec<usize> = layout.adj[f].iter().copied().filter(|&u| seen[u]).collect();
            nb.dedup();
            free_neighbors.push(nb);
            seen[f] = true;
        }
        let edges = d.edges.iter().map(|&(t, h)| (t as usize - 1, h as usize - 1)).collect();
        let log_factorials = on_strand.iter().map(|l| (1..=l.len()).map(|k| (k as f64).ln()).sum::<f64>()).sum();
        Ok(Plan {
            sign: d.sign as f64,
            kinds: layout.kinds,
            on_strand,
            free: order,
            free_neighbors,
            coord,
            dim,
            edges,
            log_factorials,
        })
    }
}

/// Workspace reused across the samples of one block.
struct Scratch {
    pos: Vec<Vec3>,
    vel: Vec<Vec3>,
    params: Vec<f64>,
    dp: Vec<f64>,
    next: Vec<f64>,
}

fn sample_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = 2.0 * rng.gen::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.gen::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

/// Density in 3-space of `center + r * direction` with `r` half-Cauchy of
/// scale `s`.
fn radial_density(x: Vec3, center: Vec3, s: f64) -> f64 {
    let r = norm(sub(x, center));
    let q = r / s;
    2.0 / (PI * s * (1.0 + q * q)) / (4.0 * PI * r * r)
}

/// Share of strand parameters drawn uniformly from the polyline part
/// `[-1, 1]`; the rest are Cauchy via `t = tan(π(u - 1/2))`.
const INTERIOR: f64 = 0.75;

fn strand_density(t: f64) -> f64 {
    let inside = if t.abs() < 1.0 { 0.5 * INTERIOR } else { 0.0 };
    inside + (1.0 - INTERIOR) / (PI * (1.0 + t * t))
}

/// One importance-weighted sample of the integrand.
fn sample(plan: &Plan, link: &[Strand], extent: f64, rng: &mut ChaCha8Rng, w: &mut Scratch) -> f64 {
    let mut log_density = plan.log_factorials;
    for (s, verts) in plan.on_strand.iter().enumerate() {
        if verts.is_empty() {
            continue;
        }
        w.params.clear();
        for _ in 0..verts.len() {
            let u: f64 = Open01.sample(rng);
            let t = if rng.gen::<f64>() < INTERIOR { 2.0 * u - 1.0 } else { (PI * (u - 0.5)).tan() };
            log_density += strand_density(t).ln();
            w.params.push(t);
        }
        w.params.sort_by(f64::total_cmp);
        for (k, &v) in verts.iter().enumerate() {
            let (p, d) = link[s].eval(w.params[k]);
            w.pos[v] = p;
            w.vel[v] = d;
        }
    }
    let s_far = extent;
    let s_near = NEIGHBOR_SCALE * extent;
    for (f, nb) in plan.free.iter().zip(&plan.free_neighbors) {
        let k = rng.gen_range(0..=nb.len());
        let (c, s) = if k == 0 { ([0.0; 3], s_far) } else { (w.pos[nb[k - 1]], s_near) };
        let u: f64 = Open01.sample(rng);
        let r = s * (0.5 * PI * u).tan();
        let x = add(c, scale(sample_direction(rng), r));
        let mut dens = radial_density(x, [0.0; 3], s_far);
        for &n in nb {
            dens += radial_density(x, w.pos[n], s_near);
        }
        log_density += (dens / (nb.len() + 1) as f64).ln();
        w.pos[*f] = x;
    }

    // Wedge of edge forms, expanded over coordinate subsets.
    let full = 1usize << plan.dim;
    w.dp.iter_mut().take(full).for_each(|x| *x = 0.0);
    w.dp[0] = 1.0;
    let mut live: Vec<usize> = vec![0];
    let mut next_live: Vec<usize> = Vec::new();
    for &(t, h) in &plan.edges {
        let Some(f) = edge_form_factor(w.pos[t], w.pos[h]) else {
            for &mask in &live {
                w.dp[mask] = 0.0;
            }
            return 0.0;
        };
        // Coordinates of this edge with d(head - tail)/dx.
        let mut js: [(usize, Vec3); 6] = [(0, [0.0; 3]); 6];
        let mut nj = 0;
        for (v, sgn) in [(t, -1.0), (h, 1.0)] {
            match plan.kinds[v] {
                VertexKind::Segment { .. } => {
                    js[nj] = (plan.coord[v], scale(w.vel[v], sgn));
                    nj += 1;
                }
                VertexKind::Free => {
                    for k in 0..3 {
                        let mut e = [0.0; 3];
                        e[k] = sgn;
                        js[nj] = (plan.coord[v] + k, e);
                        nj += 1;
                    }
                }
            }
        }
        js[..nj].sort_by_key(|j| j.0);
        next_live.clear();
        for &mask in &live {
            let val = w.dp[mask];
            if val == 0.0 {
                continue;
            }
            for x in 0..nj {
                let a = js[x].0;
                if mask & (1 << a) != 0 {
                    continue;
                }
                for y in x + 1..nj {
                    let b = js[y].0;
                    if mask & (1 << b) != 0 {
                        continue;
                    }
                    let above = |c: usize| (mask >> (c + 1)).count_ones();
                    let sign = if (above(a) + above(b)) % 2 == 0 { 1.0 } else { -1.0 };
                    let m2 = mask | (1 << a) | (1 << b);
                    if w.next[m2] == 0.0 && !next_live.contains(&m2) {
                        next_live.push(m2);
                    }
                    w.next[m2] += sign * val * f.coefficient(js[x].1, js[y].1);
                }
            }
        }
        for &mask in &live {
            w.dp[mask] = 0.0;
        }
        for &mask in &next_live {
            w.dp[mask] = w.next[mask];
            w.next[mask] = 0.0;
        }
        std::mem::swap(&mut live, &mut next_live);
    }
    let top = w.dp[full - 1];
    w.dp[full - 1] = 0.0;
    plan.sign * top / log_density.exp()
}

fn recentered(link: &PolyLink) -> Vec<Strand> {
    let c = link.center();
    link.translated(scale(c, -1.0)).strands
}

/// Importance-sampled estimate of the configuration space integral of `d`
/// (vertex order and edge directions as given) over `link`.
pub fn integrate_diagram(d: &Diagram, link: &PolyLink, samples: u64, seed: u64) -> Result<IntegralEstimate, IntegralError> {
    let plan = Plan::new(d, link)?;
    let strands = recentered(link);
    let extent = link.extent();
    let blocks = samples.div_ceil(BLOCK);
    let sums: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let n = plan.kinds.len();
            let mut w = Scratch {
                pos: vec![[0.0; 3]; n],
                vel: vec![[0.0; 3]; n],
                params: Vec::new(),
                dp: vec![0.0; 1 << plan.dim],
                next: vec![0.0; 1 << plan.dim],
            };
            let count = BLOCK.min(samples - b * BLOCK);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let x = sample(&plan, &strands, extent, &mut rng, &mut w);
                s1 += x;
                s2 += x * x;
            }
            (s1, s2)
        })
        .collect();
    let (mut s1, mut s2) = (0.0, 0.0);
    for (a, b) in sums {
        s1 += a;
        s2 += b;
    }
    let n = samples.max(1) as f64;
    let mean = s1 / n;
    let var = if samples > 1 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(IntegralEstimate { value: mean, std_error: (var / n).sqrt(), samples, seed })
}

/// Seed of the stream used for one key inside [`integrate_cocycle`].
pub fn key_seed(seed: u64, key: &str) -> u64 {
    // FNV-1a over the key, folded into the seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    seed ^ h
}

/// Coefficient-weighted sum of per-diagram estimates. Each key uses its own
/// stream derived from `seed` and the key, so the estimate is linear in `c`
/// and errors combine in quadrature.
pub fn integrate_cocycle(c: &LinComb, link: &PolyLink, samples: u64, seed: u64) -> Result<IntegralEstimate, IntegralError> {
    let (mut value, mut var) = (0.0, 0.0);
    for (k, coef) in c.iter() {
        let e = integrate_diagram(&k.to_diagram(), link, samples, key_seed(seed, &k.to_string()))?;
        let x = num_traits::ToPrimitive::to_f64(coef).unwrap_or(f64::NAN);
        value += x * e.value;
        var += x * x * e.std_error * e.std_error;
    }
    Ok(IntegralEstimate { value, std_error: var.sqrt(), samples, seed })
}

/// Linking number of strands `i`, `j` (1-based): half the signed crossings
/// in a planar projection, perturbing the view until it is generic.
pub fn exact_linking(link: &PolyLink, i: usize, j: usize) -> Result<i64, IntegralError> {
    let m = link.num_strands();
    for s in [i, j] {
        if s == 0 || s > m {
            return Err(IntegralError::StrandOutOfRange { segment: s, strands: m });
        }
    }
    if i == j {
        return Err(IntegralError::InvalidLink("linking number needs two strands".into()));
    }
    let (a, b) = (link.pieces(i - 1), link.pieces(j - 1));
    const ATTEMPTS: usize = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(0x11_4b);
    let mut view = [0.0, -1.0, 0.0];
    for _ in 0..ATTEMPTS {
        if let Some(twice) = signed_crossings(&a, &b, view) {
            if twice % 2 == 0 {
                return Ok(twice / 2);
            }
        }
        let p = sample_direction(&mut rng);
        let v = add([0.0, -1.0, 0.0], scale(p, 0.05));
        view = scale(v, 1.0 / norm(v));
    }
    Err(IntegralError::DegenerateProjection(ATTEMPTS))
}

/// Sum of crossing signs between two piece lists, viewed from `view`
/// (pointing from the viewer into the scene). `None` when some crossing
/// is too close to a piece end or the pieces overlap in projection.
fn signed_crossings(a: &[(Vec3, Vec3)], b: &[(Vec3, Vec3)], view: Vec3) -> Option<i64> {
    // Orthonormal frame (e1, e2) of the projection plane.
    let helper = if view[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let e1 = {
        let c = cross(helper, view);
        scale(c, 1.0 / norm(c))
    };
    let e2 = cross(view, e1);
    let proj = |p: Vec3| (dot(p, e1), dot(p, e2));
    let toward_viewer = scale(view, -1.0);
    let mut total = 0;
    const EPS: f64 = 1e-9;
    for &(p0, p1) in a {
        for &(q0, q1) in b {
            let (x0, y0) = proj(p0);
            let (x1, y1) = proj(p1);
            let (u0, v0) = proj(q0);
            let (u1, v1) = proj(q1);
            let (dx, dy) = (x1 - x0, y1 - y0);
            let (du, dv) = (u1 - u0, v1 - v0);
            let den = dx * dv - dy * du;
            let scale_ab = (dx.hypot(dy) * du.hypot(dv)).max(1e-300);
            if den.abs() < 1e-12 * scale_ab {
                // Parallel in projection: degenerate only if collinear and overlapping.
                let len2 = dx * dx + dy * dy;
                let cross_off = ((u0 - x0) * dy - (v0 - y0) * dx) / len2.sqrt();
                if cross_off.abs() < EPS {
                    let r0 = ((u0 - x0) * dx + (v0 - y0) * dy) / len2;
                    let r1 = ((u1 - x0) * dx + (v1 - y0) * dy) / len2;
                    if r0.max(r1) > EPS && r0.min(r1) < 1.0 - EPS {
                        return None;
                    }
                }
                continue;
            }
            let s = ((u0 - x0) * dv - (v0 - y0) * du) / den;
            let t = ((u0 - x0) * dy - (v0 - y0) * dx) / den;
            if !(-EPS..=1.0 + EPS).contains(&s) || !(-EPS..=1.0 + EPS).contains(&t) {
                continue;
            }
            if !(EPS..=1.0 - EPS).contains(&s) || !(EPS..=1.0 - EPS).contains(&t) {
                return None;
            }
            let pa = add(p0, scale(sub(p1, p0), s));
            let pb = add(q0, scale(sub(q1, q0), t));
            let depth = dot(sub(pa, pb), toward_viewer);
            if depth.abs() < EPS {
                return None;
            }
            let (over, under) = if depth > 0.0 { (sub(p1, p0), sub(q1, q0)) } else { (sub(q1, q0), sub(p1, p0)) };
            total += if dot(cross(over, under), toward_viewer) > 0.0 { 1 } else { -1 };
        }
    }
    Some(total)
}
