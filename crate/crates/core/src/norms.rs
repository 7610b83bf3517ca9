//! Norm functionals: L^p, dyadic and product BMO variants, the square
//! function and John–Nirenberg profiles.
//!
//! Supremum-type norms are computed over candidate classes derived from the
//! symbol's Haar support. [`NormReport::method`] records whether the value
//! is exact over that class or a lower bound from a greedy search.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg32;

use crate::dyadic::{DyadicInterval, DyadicRectangle};
use crate::error::{DyadicError, Result};
use crate::function::DyadicFunction;
use crate::grid::{haar_analyze, to_grid, GridFunction};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    ExactEnumeration,
    Greedy,
    Sampled,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ExactEnumeration => "exact-enumeration",
            Method::Greedy => "greedy",
            Method::Sampled => "sampled",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    None,
    Interval(DyadicInterval),
    Rectangle(DyadicRectangle),
    /// An open set given as a union of rectangles.
    Union(Vec<DyadicRectangle>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormReport {
    pub value: f64,
    pub witness: Witness,
    pub method: Method,
    /// Candidate sets evaluated.
    pub budget_used: u64,
}

impl NormReport {
    fn zero() -> Self {
        NormReport {
            value: 0.0,
            witness: Witness::None,
            method: Method::ExactEnumeration,
            budget_used: 0,
        }
    }
}

/// Limits for searches over unions of rectangles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Largest family enumerated exhaustively.
    pub exact_cap: usize,
    /// Greedy restarts beyond the cap.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            exact_cap: 14,
            restarts: 8,
            seed: 0,
        }
    }
}

/// A finite union of dyadic rectangles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenSetApprox {
    pub rects: Vec<DyadicRectangle>,
}

impl OpenSetApprox {
    pub fn new(rects: Vec<DyadicRectangle>) -> Self {
        OpenSetApprox { rects }
    }

    /// Measure of the union, exact at the common refinement.
    pub fn measure(&self) -> f64 {
        if self.rects.is_empty() {
            return 0.0;
        }
        let c = Refinement::new(&self.rects);
        (0..c.volumes.len())
            .filter(|&k| c.cover[k] != 0)
            .map(|k| c.volumes[k])
            .sum()
    }

    pub fn contains(&self, r: &DyadicRectangle) -> bool {
        let mut all = self.rects.clone();
        all.push(r.clone());
        let c = Refinement::new(&all);
        let own = 1u64 << self.rects.len();
        c.cells_of[self.rects.len()]
            .iter()
            .all(|&k| c.cover[k] & !own != 0)
    }
}

/// Coordinate compression of a family of at most 64 rectangles.
struct Refinement {
    volumes: Vec<f64>,
    /// Bit `r` set when rectangle `r` covers the cell.
    cover: Vec<u64>,
    cells_of: Vec<Vec<usize>>,
}

impl Refinement {
    fn new(rects: &[DyadicRectangle]) -> Self {
        assert!(rects.len() <= 64, "refinement holds at most 64 rectangles");
        let d = rects[0].dim();
        let mut cuts: Vec<Vec<f64>> = vec![Vec::new(); d];
        for r in rects {
            for (j, s) in r.sides.iter().enumerate() {
                let len = s.length_f64();
                cuts[j].push(s.pos as f64 * len);
                cuts[j].push((s.pos + 1) as f64 * len);
            }
        }
        for c in &mut cuts {
            c.sort_by(f64::total_cmp);
            c.dedup();
        }
        let shape: Vec<usize> = cuts.iter().map(|c| c.len() - 1).collect();
        let total: usize = shape.iter().product();
        let mut volumes = vec![1.0; total];
        for (k, v) in volumes.iter_mut().enumerate() {
            let mut rem = k;
            for j in (0..d).rev() {
                let i = rem % shape[j];
                rem /= shape[j];
                *v *= cuts[j][i + 1] - cuts[j][i];
            }
        }
        let mut cover = vec![0u64; total];
        let mut cells_of = Vec::with_capacity(rects.len());
        for (n, r) in rects.iter().enumerate() {
            let ranges: Vec<(usize, usize)> = r
                .sides
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    let len = s.length_f64();
                    let lo = cuts[j].partition_point(|&x| x < s.pos as f64 * len);
                    let hi = cuts[j].partition_point(|&x| x < (s.pos + 1) as f64 * len);
                    (lo, hi)
                })
                .collect();
            let mut cells = vec![0usize];
            for (j, (lo, hi)) in ranges.iter().enumerate() {
                let mut next = Vec::with_capacity(cells.len() * (hi - lo));
                for c in &cells {
                    for i in *lo..*hi {
                        next.push(c * shape[j] + i);
                    }
                }
                cells = next;
            }
            for &c in &cells {
                cover[c] |= 1u64 << n;
            }
            cells_of.push(cells);
        }
        Refinement {
            volumes,
            cover,
            cells_of,
        }
    }
}

pub fn lp_norm<S: Scalar>(f: &GridFunction<S>, p: f64) -> f64 {
    let vals = f.cells().iter().map(|v| v.to_f64().abs());
    if p.is_infinite() {
        return vals.fold(0.0, f64::max);
    }
    let vol = f.cell_volume().to_f64();
    (vals.map(|v| v.powf(p)).sum::<f64>() * vol).powf(1.0 / p)
}

/// `(R, <b, h_R>^2)` for a symbol with finite Haar support.
fn haar_energies<S: Scalar>(b: &DyadicFunction<S>) -> Result<Vec<(DyadicRectangle, S)>> {
    Ok(b.haar_coefficients()?
        .into_iter()
        .map(|(r, c)| (r, c.clone() * c))
        .collect())
}

/// Ancestors of `i` up to (and including) `top`, or up to the join of all
/// intervals on its half-line when `top` is `None`.
fn ancestor_chain(i: &DyadicInterval, top: &DyadicInterval) -> Vec<DyadicInterval> {
    (i.scale..=top.scale).map(|s| i.ancestor_at(s)).collect()
}

/// Candidate sides in one coordinate: all ancestors of the given intervals
/// up to the join of the intervals on the same half-line.
fn candidate_sides(sides: &[DyadicInterval]) -> BTreeSet<DyadicInterval> {
    let mut out = BTreeSet::new();
    for nonneg in [true, false] {
        let group: Vec<_> = sides.iter().filter(|i| i.is_nonnegative() == nonneg).collect();
        let Some(first) = group.first() else { continue };
        let top = group
            .iter()
            .fold(**first, |acc, i| acc.join(i).expect("same half-line"));
        for i in group {
            out.extend(ancestor_chain(i, &top));
        }
    }
    out
}

fn better(v: f64, key: &DyadicRectangle, best: f64, best_key: &Option<DyadicRectangle>) -> bool {
    match v.total_cmp(&best) {
        Ordering::Greater => true,
        Ordering::Equal => best_key.as_ref().map_or(true, |b| key < b),
        Ordering::Less => false,
    }
}

/// Sup over single dyadic rectangles `S` of `(|S|^{-1} sum_{R ⊆ S} <b,h_R>^2)^{1/2}`.
fn sup_single_rectangle<S: Scalar>(b: &DyadicFunction<S>) -> Result<NormReport> {
    let energies = haar_energies(b)?;
    if energies.is_empty() {
        return Ok(NormReport::zero());
    }
    let d = b.dim();
    let per_coord: Vec<Vec<DyadicInterval>> = (0..d)
        .map(|j| {
            let sides: Vec<_> = energies.iter().map(|(r, _)| r.sides[j]).collect();
            candidate_sides(&sides).into_iter().collect()
        })
        .collect();
    let mut best = -1.0;
    let mut best_key = None;
    let mut used = 0u64;
    let mut idx = vec![0usize; d];
    loop {
        let s = DyadicRectangle::new((0..d).map(|j| per_coord[j][idx[j]]).collect());
        let mass = energies
            .iter()
            .filter(|(r, _)| s.contains(r))
            .fold(S::zero(), |a, (_, e)| a + e.clone());
        used += 1;
        if !mass.is_zero() {
            let v = mass.to_f64() / (s.log2_volume() as f64).exp2();
            if better(v, &s, best, &best_key) {
                best = v;
                best_key = Some(s);
            }
        }
        let mut j = d;
        loop {
            if j == 0 {
                return Ok(NormReport {
                    value: best.max(0.0).sqrt(),
                    witness: match best_key {
                        Some(r) if d == 1 => Witness::Interval(r.sides[0]),
                        Some(r) => Witness::Rectangle(r),
                        None => Witness::None,
                    },
                    method: Method::ExactEnumeration,
                    budget_used: used,
                });
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < per_coord[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Dyadic BMO in one dimension: sup over dyadic `J`.
pub fn bmo_dyadic<S: Scalar>(b: &DyadicFunction<S>) -> Result<NormReport> {
    if b.dim() != 1 {
        return Err(DyadicError::UnsupportedDimension {
            required: 1,
            got: b.dim(),
        });
    }
    sup_single_rectangle(b)
}

/// Rectangular BMO: the sup restricted to single dyadic rectangles.
pub fn bmo_rect<S: Scalar>(b: &DyadicFunction<S>) -> Result<NormReport> {
    sup_single_rectangle(b)
}

/// `sup_U (|U|^{-1} sum_{R ⊆ U} w_R)` over unions `U` of subfamilies of
/// `rects`. Restricting to such unions loses nothing: for any open `U`,
/// the union of the family members inside `U` is smaller and keeps the sum.
fn sup_union_ratio(
    rects: &[DyadicRectangle],
    weights: &[f64],
    budget: &SearchBudget,
) -> (f64, Vec<usize>, Method, u64) {
    let n = rects.len();
    if n == 0 {
        return (0.0, Vec::new(), Method::ExactEnumeration, 0);
    }
    if n <= budget.exact_cap.min(24) {
        let c = Refinement::new(rects);
        let mut best = (-1.0, 0u64);
        for mask in 1u64..(1u64 << n) {
            let measure: f64 = c
                .cover
                .iter()
                .zip(&c.volumes)
                .filter(|(cv, _)| **cv & mask != 0)
                .map(|(_, v)| v)
                .sum();
            let mass: f64 = (0..n)
                .filter(|&r| c.cells_of[r].iter().all(|&k| c.cover[k] & mask != 0))
                .map(|r| weights[r])
                .sum();
            let v = mass / measure;
            if v > best.0 {
                best = (v, mask);
            }
        }
        let chosen = (0..n).filter(|r| best.1 >> r & 1 == 1).collect();
        (best.0, chosen, Method::ExactEnumeration, (1u64 << n) - 1)
    } else {
        greedy_union(rects, weights, budget)
    }
}

/// Greedy growth of a union, adding whichever rectangle gives the best
/// ratio, from several starts; the best prefix seen is returned.
fn greedy_union(
    rects: &[DyadicRectangle],
    weights: &[f64],
    budget: &SearchBudget,
) -> (f64, Vec<usize>, Method, u64) {
    let n = rects.len();
    let mut rng = Pcg32::seed_from_u64(budget.seed);
    let single: Vec<f64> = (0..n)
        .map(|r| weights[r] / (rects[r].log2_volume() as f64).exp2())
        .collect();
    let first = (0..n)
        .max_by(|&a, &b| single[a].total_cmp(&single[b]).then(b.cmp(&a)))
        .expect("nonempty");
    let mut best = (-1.0, Vec::new());
    let mut used = 0u64;
    for t in 0..budget.restarts.max(1) {
        let start = if t == 0 { first } else { rng.gen_range(0..n) };
        let mut chosen = vec![start];
        loop {
            let set = OpenSetApprox::new(chosen.iter().map(|&r| rects[r].clone()).collect());
            let measure = set.measure();
            let mass: f64 = (0..n)
                .filter(|&r| chosen.contains(&r) || set.contains(&rects[r]))
                .map(|r| weights[r])
                .sum();
            used += 1;
            let v = mass / measure;
            if v > best.0 {
                best = (v, chosen.clone());
            }
            if chosen.len() == n || chosen.len() >= 63 {
                break;
            }
            // next rectangle: best single-step ratio
            let mut pick = None;
            let mut pick_v = f64::NEG_INFINITY;
            for r in 0..n {
                if chosen.contains(&r) {
                    continue;
                }
                let mut trial = set.rects.clone();
                trial.push(rects[r].clone());
                let ts = OpenSetApprox::new(trial);
                let m: f64 = (0..n)
                    .filter(|&x| x == r || chosen.contains(&x) || ts.contains(&rects[x]))
                    .map(|x| weights[x])
                    .sum();
                let tv = m / ts.measure();
                used += 1;
                if tv > pick_v {
                    pick_v = tv;
                    pick = Some(r);
                }
            }
            match pick {
                Some(r) => chosen.push(r),
                None => break,
            }
        }
    }
    best.1.sort_unstable();
    (best.0, best.1, Method::Greedy, used)
}

/// Product BMO, as a sup over unions of the symbol's support rectangles.
pub fn bmo_product<S: Scalar>(b: &DyadicFunction<S>, budget: &SearchBudget) -> Result<NormReport> {
    let energies = haar_energies(b)?;
    if energies.is_empty() {
        return Ok(NormReport::zero());
    }
    let rects: Vec<_> = energies.iter().map(|(r, _)| r.clone()).collect();
    let weights: Vec<f64> = energies.iter().map(|(_, e)| e.to_f64()).collect();
    let (v, chosen, method, used) = sup_union_ratio(&rects, &weights, budget);
    Ok(NormReport {
        value: v.max(0.0).sqrt(),
        witness: Witness::Union(chosen.into_iter().map(|r| rects[r].clone()).collect()),
        method,
        budget_used: used,
    })
}

/// The restricted norm over collections whose sides outside `b_set` are
/// frozen.
pub fn bmo_restricted<S: Scalar>(
    b: &DyadicFunction<S>,
    b_set: &BTreeSet<usize>,
    budget: &SearchBudget,
) -> Result<NormReport> {
    let d = b.dim();
    if b_set.is_empty() || b_set.iter().any(|j| *j >= d) {
        return Err(DyadicError::InvalidTensorSpec(format!(
            "restricted norm needs a nonempty subset of 0..{d}"
        )));
    }
    let energies = haar_energies(b)?;
    // group by the frozen sides
    let mut groups: BTreeMap<Vec<DyadicInterval>, Vec<(DyadicRectangle, f64)>> = BTreeMap::new();
    for (r, e) in &energies {
        let frozen: Vec<_> = (0..d).filter(|j| !b_set.contains(j)).map(|j| r.sides[j]).collect();
        let free = DyadicRectangle::new(b_set.iter().map(|&j| r.sides[j]).collect());
        groups.entry(frozen).or_default().push((free, e.to_f64()));
    }
    let mut best = NormReport::zero();
    let mut best_sq = -1.0;
    let mut used = 0;
    let mut method = Method::ExactEnumeration;
    for (frozen, members) in groups {
        let frozen_vol: f64 = frozen.iter().map(|i| i.length_f64()).product();
        let rects: Vec<_> = members.iter().map(|(r, _)| r.clone()).collect();
        let weights: Vec<_> = members.iter().map(|(_, w)| *w).collect();
        let (v, chosen, m, u) = sup_union_ratio(&rects, &weights, budget);
        used += u;
        if m == Method::Greedy {
            method = Method::Greedy;
        }
        let v = v / frozen_vol;
        if v > best_sq {
            best_sq = v;
            let witness = chosen
                .into_iter()
                .map(|r| {
                    let mut free = rects[r].sides.iter();
                    let mut fr = frozen.iter();
                    DyadicRectangle::new(
                        (0..d)
                            .map(|j| {
                                if b_set.contains(&j) {
                                    *free.next().expect("free side")
                                } else {
                                    *fr.next().expect("frozen side")
                                }
                            })
                            .collect(),
                    )
                })
                .collect();
            best.witness = Witness::Union(witness);
        }
    }
    best.value = best_sq.max(0.0).sqrt();
    best.method = method;
    best.budget_used = used;
    Ok(best)
}

/// `sup_R |<b, h_R>| / |R|^{1/2}`, with its maximizing rectangle.
pub fn sup_haar_ratio<S: Scalar>(b: &DyadicFunction<S>) -> Result<(f64, Option<DyadicRectangle>)> {
    let mut best: Option<(S, DyadicRectangle)> = None;
    for (r, c) in b.haar_coefficients()? {
        // compare squares exactly: c^2 / |R|
        let v = c.clone() * c / r.volume::<S>();
        let take = match &best {
            None => true,
            Some((bv, br)) => match v.total_cmp(bv) {
                Ordering::Greater => true,
                Ordering::Equal => r < *br,
                Ordering::Less => false,
            },
        };
        if take {
            best = Some((v, r));
        }
    }
    Ok(match best {
        Some((v, r)) => (v.to_f64().sqrt(), Some(r)),
        None => (0.0, None),
    })
}

/// `|| (sum_R |<f, h_R>|^2 (h¹_R)^2)^{1/2} ||_p` over the window, including
/// the window-mean component.
pub fn square_function<S: Scalar>(f: &GridFunction<S>, p: f64) -> f64 {
    let coeffs = haar_analyze(f);
    let shape = f.shape();
    let mut data: Vec<f64> = coeffs
        .data()
        .iter()
        .map(|c| {
            let x = c.to_f64();
            x * x
        })
        .collect();
    // spread c^2 / |R| over the cells of R, one axis at a time
    let total: usize = shape.iter().product();
    for j in 0..shape.len() {
        let n = shape[j];
        let w = f.window().sides[j];
        let stride: usize = shape[j + 1..].iter().product();
        let outer = total / (n * stride);
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                let line: Vec<f64> = (0..n).map(|i| data[base + i * stride]).collect();
                let out = spread_1d(&line, w.scale);
                for (i, v) in out.into_iter().enumerate() {
                    data[base + i * stride] = v;
                }
            }
        }
    }
    let sq = GridFunction::from_cells(
        f.window().clone(),
        f.resolution().to_vec(),
        data.into_iter().map(f64::sqrt).collect(),
    )
    .expect("same grid");
    lp_norm(&sq, p)
}

fn spread_1d(c: &[f64], w_scale: i32) -> Vec<f64> {
    let n = c.len();
    let mut val = vec![c[0] / (w_scale as f64).exp2()];
    let mut depth = 0;
    while val.len() < n {
        let m = val.len();
        let inv_len = 1.0 / ((w_scale - depth) as f64).exp2();
        let mut next = Vec::with_capacity(2 * m);
        for (p, v) in val.iter().enumerate() {
            let add = c[m + p] * inv_len;
            next.push(v + add);
            next.push(v + add);
        }
        val = next;
        depth += 1;
    }
    val
}

/// `(|J|^{-1/p} ||b_J||_p, |J|^{-1/q} ||b_J||_q)` for the localization
/// `b_J = sum_{I ⊆ J} <b, h_I> h_I`.
pub fn jn_profile<S: Scalar>(b: &DyadicFunction<S>, j: &DyadicInterval, p: f64, q: f64) -> Result<(f64, f64)> {
    if b.dim() != 1 {
        return Err(DyadicError::UnsupportedDimension {
            required: 1,
            got: b.dim(),
        });
    }
    let local: Vec<_> = b
        .haar_coefficients()?
        .into_iter()
        .filter(|(r, _)| j.contains(&r.sides[0]))
        .collect();
    if local.is_empty() {
        return Ok((0.0, 0.0));
    }
    let finest = local.iter().map(|(r, _)| r.sides[0].scale).min().expect("nonempty");
    let bj = DyadicFunction::from_terms(
        1,
        local
            .into_iter()
            .map(|(r, c)| (c, vec![crate::atom::Atom1D::Haar(r.sides[0])])),
    )?;
    let window = DyadicRectangle::new(vec![*j]);
    let g = to_grid(&bj, &window, &[1 - finest])?;
    let len = j.length_f64();
    Ok((
        lp_norm(&g, p) * len.powf(-1.0 / p),
        lp_norm(&g, q) * len.powf(-1.0 / q),
    ))
}
