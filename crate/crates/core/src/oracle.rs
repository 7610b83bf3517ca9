//! Reference implementations by direct truncated summation.
//!
//! Nothing here calls into [`crate::operators`] or the atom calculus: each
//! operator is evaluated from its defining sum on a float grid, with the
//! truncated geometric tails bounded explicitly.

use crate::dyadic::{DyadicInterval, DyadicRectangle};
use crate::error::{DyadicError, Result};
use crate::grid::GridFunction;

type G = GridFunction<f64>;

/// Scales summed by the Riesz oracle: `s_min <= scale <= s_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruncationSpec {
    pub s_min: i32,
    pub s_max: i32,
}

impl TruncationSpec {
    /// `m` levels below the resolution and `m` above the window side.
    pub fn with_depth(window_scale: i32, resolution: i32, m: u32) -> Self {
        TruncationSpec {
            s_min: -resolution - m as i32,
            s_max: window_scale + m as i32,
        }
    }
}

/// Float rounding allowance for a sum of `terms` values of size `scale`.
pub fn rounding_slack(scale: f64, terms: usize) -> f64 {
    64.0 * f64::EPSILON * scale.abs().max(1.0) * (terms as f64).max(1.0)
}

/// Applies `op` to every line of `data` along `axis`.
fn along_axis(
    data: &mut [f64],
    shape: &[usize],
    axis: usize,
    mut op: impl FnMut(&[f64]) -> Vec<f64>,
) {
    let total: usize = shape.iter().product();
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let outer = total / (n * stride);
    for o in 0..outer {
        for s in 0..stride {
            let base = o * n * stride + s;
            let line: Vec<f64> = (0..n).map(|i| data[base + i * stride]).collect();
            for (i, v) in op(&line).into_iter().enumerate() {
                data[base + i * stride] = v;
            }
        }
    }
}

/// `sum_{s_min <= s(I) <= s_max} <f, 1_I> |I|^{-alpha} 1_I` along one
/// axis of a window side `w` with cells at scale `-res`.
fn riesz_line(f: &[f64], w: &DyadicInterval, res: i32, lam: f64, trunc: &TruncationSpec) -> Vec<f64> {
    let alpha = 1.0 + lam.log2();
    let cell = (-res as f64).exp2();
    let n = f.len();
    let mut out = vec![0.0; n];
    for s in trunc.s_min..=trunc.s_max {
        let len = (s as f64).exp2();
        let weight = len.powf(-alpha);
        if s <= -res {
            // each cell meets exactly one interval of this scale, and
            // <f, 1_I> = f(cell) |I| there
            for (o, v) in out.iter_mut().zip(f) {
                *o += v * len * weight;
            }
        } else if s <= w.scale {
            let per = 1usize << (s + res);
            for block in 0..n / per {
                let range = block * per..(block + 1) * per;
                let mass: f64 = f[range.clone()].iter().sum::<f64>() * cell;
                for o in &mut out[range] {
                    *o += mass * weight;
                }
            }
        } else {
            // the single interval of this scale that meets the window
            let mass: f64 = f.iter().sum::<f64>() * cell;
            for o in &mut out {
                *o += mass * weight;
            }
        }
    }
    out
}

/// Truncated Riesz potential along `coord`, with the bound on the
/// discarded tails.
pub fn riesz_oracle(f: &G, lam: f64, coord: usize, trunc: &TruncationSpec) -> Result<(G, f64)> {
    if coord >= f.dim() {
        return Err(DyadicError::CoordinateOutOfRange {
            coord,
            dim: f.dim(),
        });
    }
    let w = f.window().sides[coord];
    let res = f.resolution()[coord];
    if trunc.s_min > -res || trunc.s_max < w.scale {
        return Err(DyadicError::InvalidGrid(format!(
            "truncation {trunc:?} does not cover resolution 2^-{res} and window {w}"
        )));
    }
    let shape = f.shape();
    let mut data = f.cells().to_vec();
    let mut max_line_mass: f64 = 0.0;
    let cell = (-res as f64).exp2();
    along_axis(&mut data, &shape, coord, |line| {
        max_line_mass = max_line_mass.max((line.iter().sum::<f64>() * cell).abs());
        riesz_line(line, &w, res, lam, trunc)
    });
    let sup = f.cells().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mu = 1.0 / (2.0 * lam);
    let descending = sup * lam.powi(1 - trunc.s_min) / (1.0 - lam);
    let ascending = max_line_mass * mu.powi(trunc.s_max + 1) / (1.0 - mu);
    let out = GridFunction::from_cells(f.window().clone(), f.resolution().to_vec(), data)?;
    Ok((out, descending + ascending))
}

/// `[M_b, I_alpha] f = b I f - I (b f)` on a 1-d grid, with `b` and `f`
/// supported in the window.
pub fn commutator_oracle(b: &G, f: &G, lam: f64, trunc: &TruncationSpec) -> Result<(G, f64)> {
    let (rf, t1) = riesz_oracle(f, lam, 0, trunc)?;
    let bf = b.zip_with(f, |x, y| x * y)?;
    let (rbf, t2) = riesz_oracle(&bf, lam, 0, trunc)?;
    let left = b.zip_with(&rf, |x, y| x * y)?;
    let out = left.zip_with(&rbf, |x, y| x - y)?;
    let bsup = b.cells().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((out, bsup * t1 + t2))
}

/// Haar function values on the grid cells of one window side.
fn haar_on_side(i: &DyadicInterval, w: &DyadicInterval, res: i32) -> Vec<f64> {
    let n = 1usize << (w.scale + res);
    let cell = (-res as f64).exp2();
    let left = w.pos as f64 * w.length_f64();
    let len = i.length_f64();
    let (a, m, b) = (i.pos as f64 * len, (i.pos as f64 + 0.5) * len, (i.pos + 1) as f64 * len);
    let amp = len.powf(-0.5);
    (0..n)
        .map(|k| {
            let x = left + (k as f64 + 0.5) * cell;
            if x < a || x >= b {
                0.0
            } else if x < m {
                -amp
            } else {
                amp
            }
        })
        .collect()
}

fn indicator_on_side(i: &DyadicInterval, w: &DyadicInterval, res: i32) -> Vec<f64> {
    let n = 1usize << (w.scale + res);
    let cell = (-res as f64).exp2();
    let left = w.pos as f64 * w.length_f64();
    let len = i.length_f64();
    let (a, b) = (i.pos as f64 * len, (i.pos + 1) as f64 * len);
    (0..n)
        .map(|k| {
            let x = left + (k as f64 + 0.5) * cell;
            if x >= a && x < b {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

fn outer(factors: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![1.0];
    for v in factors {
        let mut next = Vec::with_capacity(out.len() * v.len());
        for a in &out {
            for b in v {
                next.push(a * b);
            }
        }
        out = next;
    }
    out
}

fn dot(f: &G, g: &[f64]) -> f64 {
    let vol = f.cell_volume();
    f.cells().iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * vol
}

/// Which paraproduct the oracle evaluates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParaKind {
    /// `sum_R b_R |R|^{-1} <f, 1_R> h_R`
    B,
    /// `sum_I |I|^{-1/2} <b, h_I> <f, h_I> h_I`, one dimension
    C,
    /// `sum_n (P_n b)(P_{n+k} f)`, one dimension
    D(u32),
    /// Tensor form: `B` on the coordinates in the set, `D_{v(j)}` elsewhere.
    E {
        b_set: Vec<usize>,
        shifts: Vec<u32>,
    },
}

/// Paraproducts from their defining sums. The symbol is given by its Haar
/// coefficients; the input is a grid function on a window containing every
/// support rectangle.
pub fn para_oracle(kind: &ParaKind, symbol: &[(DyadicRectangle, f64)], f: &G) -> Result<G> {
    let window = f.window().clone();
    let res = f.resolution().to_vec();
    let d = f.dim();
    let mut out = vec![0.0; f.len()];
    let side = |j: usize| window.sides[j];
    for (r, c) in symbol {
        if r.dim() != d {
            return Err(DyadicError::DimensionMismatch {
                expected: d,
                got: r.dim(),
            });
        }
        match kind {
            ParaKind::B => {
                let ind: Vec<_> = (0..d).map(|j| indicator_on_side(&r.sides[j], &side(j), res[j])).collect();
                let h: Vec<_> = (0..d).map(|j| haar_on_side(&r.sides[j], &side(j), res[j])).collect();
                let vol = (r.log2_volume() as f64).exp2();
                let coef = c * dot(f, &outer(&ind)) / vol;
                for (o, v) in out.iter_mut().zip(outer(&h)) {
                    *o += coef * v;
                }
            }
            ParaKind::C => {
                if d != 1 {
                    return Err(DyadicError::UnsupportedDimension { required: 1, got: d });
                }
                let h = haar_on_side(&r.sides[0], &side(0), res[0]);
                let coef = c * dot(f, &h) * r.sides[0].length_f64().powf(-0.5);
                for (o, v) in out.iter_mut().zip(&h) {
                    *o += coef * v;
                }
            }
            ParaKind::D(_) => {}
            ParaKind::E { b_set, shifts } => {
                let mut test = Vec::with_capacity(d);
                let mut shape = Vec::with_capacity(d);
                for j in 0..d {
                    let i = r.sides[j];
                    if b_set.contains(&j) {
                        test.push(
                            indicator_on_side(&i, &side(j), res[j])
                                .into_iter()
                                .map(|x| x / i.length_f64())
                                .collect(),
                        );
                        shape.push(haar_on_side(&i, &side(j), res[j]));
                    } else {
                        let v = shifts.get(j).copied().unwrap_or(0);
                        let top = i.ancestor(v);
                        test.push(haar_on_side(&top, &side(j), res[j]));
                        if v == 0 {
                            shape.push(
                                indicator_on_side(&i, &side(j), res[j])
                                    .into_iter()
                                    .map(|x| x / i.length_f64())
                                    .collect(),
                            );
                        } else {
                            // h_{I_v} is constant on I
                            let amp = top.length_f64().powf(-0.5);
                            let sub = i.ancestor_at(top.scale - 1);
                            let sign_val = if sub.is_right_child() { amp } else { -amp };
                            shape.push(
                                haar_on_side(&i, &side(j), res[j])
                                    .into_iter()
                                    .map(|x| x * sign_val)
                                    .collect(),
                            );
                        }
                    }
                }
                let coef = c * dot(f, &outer(&test));
                for (o, v) in out.iter_mut().zip(outer(&shape)) {
                    *o += coef * v;
                }
            }
        }
    }
    if let ParaKind::D(k) = kind {
        if d != 1 {
            return Err(DyadicError::UnsupportedDimension { required: 1, got: d });
        }
        out = para_d_by_projections(*k, symbol, f)?;
    }
    GridFunction::from_cells(window, res, out)
}

/// Haar coefficients of a 1-d grid function at scale `n`, including the
/// ancestor of the window when `n` exceeds its scale.
fn projection_1d(f: &G, n: i32) -> Vec<f64> {
    let w = f.window().sides[0];
    let res = f.resolution()[0];
    let mut out = vec![0.0; f.len()];
    if n > -res && n <= w.scale {
        for i in w.descendants_at(n) {
            let h = haar_on_side(&i, &w, res);
            let c = dot(f, &h);
            for (o, v) in out.iter_mut().zip(&h) {
                *o += c * v;
            }
        }
    } else if n > w.scale {
        let i = w.ancestor_at(n);
        let h = haar_on_side(&i, &w, res);
        let c = dot(f, &h);
        for (o, v) in out.iter_mut().zip(&h) {
            *o += c * v;
        }
    }
    out
}

fn para_d_by_projections(k: u32, symbol: &[(DyadicRectangle, f64)], f: &G) -> Result<Vec<f64>> {
    let w = f.window().sides[0];
    let res = f.resolution()[0];
    let mut scales: Vec<i32> = symbol.iter().map(|(r, _)| r.sides[0].scale).collect();
    scales.sort_unstable();
    scales.dedup();
    let mut out = vec![0.0; f.len()];
    for n in scales {
        let mut pb = vec![0.0; f.len()];
        for (r, c) in symbol.iter().filter(|(r, _)| r.sides[0].scale == n) {
            for (o, v) in pb.iter_mut().zip(haar_on_side(&r.sides[0], &w, res)) {
                *o += c * v;
            }
        }
        let pf = projection_1d(f, n + k as i32);
        for ((o, a), b) in out.iter_mut().zip(&pb).zip(&pf) {
            *o += a * b;
        }
    }
    Ok(out)
}

/// One row of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub depth: u32,
    pub max_error: f64,
    pub tail_bound: f64,
    /// `(error(depth) / error(previous depth))^{1 / step}`.
    pub rate_per_level: Option<f64>,
}

/// Riesz oracle against a reference grid at increasing truncation depths.
pub fn convergence_study(f: &G, lam: f64, coord: usize, reference: &G, depths: &[u32]) -> Result<Vec<ConvergenceRow>> {
    let w = f.window().sides[coord];
    let res = f.resolution()[coord];
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &m in depths {
        let trunc = TruncationSpec::with_depth(w.scale, res, m);
        let (g, tail) = riesz_oracle(f, lam, coord, &trunc)?;
        let err = g
            .cells()
            .iter()
            .zip(reference.cells())
            .fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
        let rate = rows.last().and_then(|prev| {
            (prev.max_error > 0.0 && err > 0.0)
                .then(|| (err / prev.max_error).powf(1.0 / (m - prev.depth) as f64))
        });
        rows.push(ConvergenceRow {
            depth: m,
            max_error: err,
            tail_bound: tail,
            rate_per_level: rate,
        });
    }
    Ok(rows)
}
