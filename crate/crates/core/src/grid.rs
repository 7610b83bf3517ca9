//! Step functions sampled on a dyadic window, and their Haar transform.
//!
//! Cells are stored row-major with coordinate 0 varying slowest. The 1-d
//! Haar basis of a window side `W` with `2^L` cells is ordered as
//! `[h¹_W, h_W, h_{W-}, h_{W+}, ...]`: index 0 is the normalized indicator
//! and index `i >= 1` is the heap node at depth `floor(log2 i)`.

use crate::atom::Atom1D;
use crate::dyadic::{DyadicInterval, DyadicPoint, DyadicRectangle};
use crate::error::{DyadicError, Result};
use crate::function::DyadicFunction;
use crate::scalar::Scalar;

/// Largest supported number of cells along one coordinate (as a power of 2).
pub const MAX_LEVELS: i32 = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<S> {
    window: DyadicRectangle,
    resolution: Vec<i32>,
    cells: Vec<S>,
}

/// `h_R` (all `eps` zero) or a mixed tensor with `h¹` in the coordinates
/// where `eps_j = 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HaarIndex {
    pub rect: DyadicRectangle,
    pub eps: Vec<u8>,
}

impl HaarIndex {
    pub fn haar(rect: DyadicRectangle) -> Self {
        let d = rect.dim();
        HaarIndex {
            rect,
            eps: vec![0; d],
        }
    }

    /// Exact value at a point.
    pub fn eval<S: Scalar>(&self, x: &[DyadicPoint]) -> S {
        let mut v = S::one();
        for ((i, e), p) in self.rect.sides.iter().zip(&self.eps).zip(x) {
            let f = if *e == 0 {
                Atom1D::<S>::Haar(*i).eval(p)
            } else if i.contains_point(p) {
                S::pow2_half(-i.scale)
            } else {
                S::zero()
            };
            if f.is_zero() {
                return S::zero();
            }
            v = v * f;
        }
        v
    }

    /// The basis function as an algebra element.
    pub fn to_function<S: Scalar>(&self) -> DyadicFunction<S> {
        let mut coef = S::one();
        let factors = self
            .rect
            .sides
            .iter()
            .zip(&self.eps)
            .map(|(i, e)| {
                if *e == 0 {
                    Atom1D::Haar(*i)
                } else {
                    coef = coef.clone() * S::pow2_half(-i.scale);
                    Atom1D::Indicator(*i)
                }
            })
            .collect();
        DyadicFunction::tensor(coef, factors)
    }
}

/// Cell counts per coordinate for a window at a resolution.
pub fn grid_shape(window: &DyadicRectangle, resolution: &[i32]) -> Result<Vec<usize>> {
    if window.dim() != resolution.len() {
        return Err(DyadicError::DimensionMismatch {
            expected: window.dim(),
            got: resolution.len(),
        });
    }
    window
        .sides
        .iter()
        .zip(resolution)
        .map(|(w, n)| {
            let levels = w.scale + n;
            if !(0..=MAX_LEVELS).contains(&levels) {
                return Err(DyadicError::InvalidGrid(format!(
                    "window side {w} at resolution 2^-{n} gives 2^{levels} cells"
                )));
            }
            Ok(1usize << levels)
        })
        .collect()
}

impl<S: Scalar> GridFunction<S> {
    pub fn zeros(window: DyadicRectangle, resolution: Vec<i32>) -> Result<Self> {
        let shape = grid_shape(&window, &resolution)?;
        let n = shape.iter().product();
        Ok(GridFunction {
            window,
            resolution,
            cells: vec![S::zero(); n],
        })
    }

    pub fn from_cells(window: DyadicRectangle, resolution: Vec<i32>, cells: Vec<S>) -> Result<Self> {
        let shape = grid_shape(&window, &resolution)?;
        let n: usize = shape.iter().product();
        if cells.len() != n {
            return Err(DyadicError::InvalidGrid(format!(
                "expected {n} cells, got {}",
                cells.len()
            )));
        }
        Ok(GridFunction {
            window,
            resolution,
            cells,
        })
    }

    pub fn window(&self) -> &DyadicRectangle {
        &self.window
    }

    pub fn resolution(&self) -> &[i32] {
        &self.resolution
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn cells(&self) -> &[S] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [S] {
        &mut self.cells
    }

    pub fn into_cells(self) -> Vec<S> {
        self.cells
    }

    pub fn shape(&self) -> Vec<usize> {
        grid_shape(&self.window, &self.resolution).expect("validated at construction")
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Volume of one cell.
    pub fn cell_volume(&self) -> S {
        S::from_int(2).powi(-self.resolution.iter().sum::<i32>())
    }

    /// The dyadic cell with flat index `k`.
    pub fn cell(&self, k: usize) -> DyadicRectangle {
        let shape = self.shape();
        let mut rem = k;
        let mut sides = vec![DyadicInterval::unit(); shape.len()];
        for j in (0..shape.len()).rev() {
            let i = rem % shape[j];
            rem /= shape[j];
            let w = &self.window.sides[j];
            let first = w.descendants_at(-self.resolution[j]).next().expect("nonempty").pos;
            sides[j] = DyadicInterval::new(-self.resolution[j], first + i as i64);
        }
        DyadicRectangle::new(sides)
    }

    /// Left-bottom corner of cell `k`, a point at which every grid-compatible
    /// function takes its cell value.
    pub fn cell_point(&self, k: usize) -> Vec<DyadicPoint> {
        self.cell(k)
            .sides
            .iter()
            .map(|i| DyadicPoint::new(i.pos, i.scale))
            .collect()
    }

    /// Flat index of the cell containing `x`, if inside the window.
    pub fn locate(&self, x: &[DyadicPoint]) -> Option<usize> {
        let shape = self.shape();
        let mut k = 0usize;
        for (j, p) in x.iter().enumerate() {
            let w = &self.window.sides[j];
            if !w.contains_point(p) {
                return None;
            }
            let first = w.pos << (w.scale + self.resolution[j]);
            let i = (p.cell(-self.resolution[j]) - first) as usize;
            k = k * shape[j] + i;
        }
        Some(k)
    }

    pub fn value_at(&self, x: &[DyadicPoint]) -> S {
        self.locate(x)
            .map(|k| self.cells[k].clone())
            .unwrap_or_else(S::zero)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> GridFunction<T> {
        GridFunction {
            window: self.window.clone(),
            resolution: self.resolution.clone(),
            cells: self.cells.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> GridFunction<f64> {
        self.map(|v| v.to_f64())
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.window != other.window || self.resolution != other.resolution {
            return Err(DyadicError::InvalidGrid("grids differ".into()));
        }
        Ok(())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        self.same_grid(other)?;
        Ok(GridFunction {
            window: self.window.clone(),
            resolution: self.resolution.clone(),
            cells: self.cells.iter().zip(&other.cells).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn integral(&self) -> S {
        let sum = self.cells.iter().fold(S::zero(), |a, v| a + v.clone());
        sum * self.cell_volume()
    }

    /// `∫ f g` over the window.
    pub fn inner(&self, other: &Self) -> Result<S> {
        self.same_grid(other)?;
        let sum = self
            .cells
            .iter()
            .zip(&other.cells)
            .fold(S::zero(), |a, (x, y)| a + x.clone() * y.clone());
        Ok(sum * self.cell_volume())
    }

    /// `∫_R f` for a dyadic rectangle no finer than the grid.
    pub fn integral_over(&self, r: &DyadicRectangle) -> S {
        let mut acc = S::zero();
        for k in 0..self.cells.len() {
            if r.contains(&self.cell(k)) {
                acc = acc + self.cells[k].clone();
            }
        }
        acc * self.cell_volume()
    }

    pub fn max_abs(&self) -> S {
        self.cells.iter().fold(S::zero(), |m, v| {
            let a = v.abs();
            if a.total_cmp(&m) == std::cmp::Ordering::Greater {
                a
            } else {
                m
            }
        })
    }
}

/// 1-d samples of an atom on the cells of one window side.
fn sample_atom<S: Scalar>(
    a: &Atom1D<S>,
    side: &DyadicInterval,
    res: i32,
    coord: usize,
) -> Result<Vec<S>> {
    if a.jump_scale() < -res && !a.jump_region().disjoint(side) {
        return Err(DyadicError::ResolutionTooCoarse {
            atom: format!("{}", a.interval()),
            resolution: -res,
            coord,
        });
    }
    Ok(side
        .descendants_at(-res)
        .map(|c| a.eval(&DyadicPoint::new(c.pos, c.scale)))
        .collect())
}

/// Exact sampling of an algebra element on a window.
pub fn to_grid<S: Scalar>(
    f: &DyadicFunction<S>,
    window: &DyadicRectangle,
    resolution: &[i32],
) -> Result<GridFunction<S>> {
    if f.dim() != window.dim() {
        return Err(DyadicError::DimensionMismatch {
            expected: window.dim(),
            got: f.dim(),
        });
    }
    let mut g = GridFunction::zeros(window.clone(), resolution.to_vec())?;
    let shape = g.shape();
    for (c, atoms) in f.terms() {
        let mut factors = Vec::with_capacity(atoms.len());
        for (j, a) in atoms.iter().enumerate() {
            factors.push(sample_atom(a, &window.sides[j], resolution[j], j)?);
        }
        if factors.iter().any(|v| v.iter().all(|x| x.is_zero())) {
            continue;
        }
        add_outer(&mut g.cells, &shape, c, &factors);
    }
    Ok(g)
}

/// `cells += c · v_0 ⊗ ... ⊗ v_{d-1}`.
fn add_outer<S: Scalar>(cells: &mut [S], shape: &[usize], c: &S, factors: &[Vec<S>]) {
    fn rec<S: Scalar>(
        cells: &mut [S],
        shape: &[usize],
        factors: &[Vec<S>],
        j: usize,
        base: usize,
        acc: S,
    ) {
        if j == shape.len() {
            cells[base] += acc;
            return;
        }
        for (i, v) in factors[j].iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            rec(cells, shape, factors, j + 1, base * shape[j] + i, acc.clone() * v.clone());
        }
    }
    rec(cells, shape, factors, 0, 0, c.clone());
}

/// Coefficients of a grid function in the tensor Haar basis of its window.
#[derive(Clone, Debug, PartialEq)]
pub struct GridCoefficients<S> {
    window: DyadicRectangle,
    resolution: Vec<i32>,
    data: Vec<S>,
}

fn heap_interval(w: &DyadicInterval, i: usize) -> DyadicInterval {
    let depth = usize::BITS - 1 - i.leading_zeros();
    let p = i - (1usize << depth);
    DyadicInterval::new(w.scale - depth as i32, (w.pos << depth) + p as i64)
}

impl<S: Scalar> GridCoefficients<S> {
    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn window(&self) -> &DyadicRectangle {
        &self.window
    }

    /// Coefficient of `h¹_window`, the window-mean component.
    pub fn mean_component(&self) -> &S {
        &self.data[0]
    }

    /// The basis element at flat index `k`.
    pub fn index(&self, k: usize) -> HaarIndex {
        let shape = grid_shape(&self.window, &self.resolution).expect("valid");
        let mut rem = k;
        let d = shape.len();
        let mut sides = vec![DyadicInterval::unit(); d];
        let mut eps = vec![0u8; d];
        for j in (0..d).rev() {
            let i = rem % shape[j];
            rem /= shape[j];
            if i == 0 {
                sides[j] = self.window.sides[j];
                eps[j] = 1;
            } else {
                sides[j] = heap_interval(&self.window.sides[j], i);
            }
        }
        HaarIndex {
            rect: DyadicRectangle::new(sides),
            eps,
        }
    }

    /// Nonzero coefficients with their basis elements.
    pub fn nonzero(&self) -> Vec<(HaarIndex, S)> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (self.index(k), c.clone()))
            .collect()
    }

    /// Coefficients of pure Haar functions `h_R` (no `h¹` factor).
    pub fn haar_only(&self) -> Vec<(DyadicRectangle, S)> {
        self.nonzero()
            .into_iter()
            .filter(|(h, _)| h.eps.iter().all(|e| *e == 0))
            .map(|(h, c)| (h.rect, c))
            .collect()
    }
}

/// Applies a 1-d transform along every axis in turn.
fn along_axes<S: Scalar>(
    data: &mut [S],
    shape: &[usize],
    mut op: impl FnMut(usize, &[S]) -> Vec<S>,
) {
    let total: usize = shape.iter().product();
    for j in 0..shape.len() {
        let n = shape[j];
        let stride: usize = shape[j + 1..].iter().product();
        let outer = total / (n * stride);
        let mut line = Vec::with_capacity(n);
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                line.clear();
                line.extend((0..n).map(|i| data[base + i * stride].clone()));
                let out = op(j, &line);
                for (i, v) in out.into_iter().enumerate() {
                    data[base + i * stride] = v;
                }
            }
        }
    }
}

fn analyze_1d<S: Scalar>(v: &[S], w_scale: i32, res: i32) -> Vec<S> {
    let n = v.len();
    let delta = S::from_int(2).powi(-res);
    let mut out = vec![S::zero(); n];
    let mut cur: Vec<S> = v.to_vec();
    let mut depth = n.trailing_zeros() as i32;
    while cur.len() > 1 {
        depth -= 1;
        let amp = S::pow2_half(-(w_scale - depth)) * delta.clone();
        let half = cur.len() / 2;
        let mut next = Vec::with_capacity(half);
        for p in 0..half {
            let a = cur[2 * p].clone();
            let b = cur[2 * p + 1].clone();
            out[half + p] = amp.clone() * (b.clone() - a.clone());
            next.push(a + b);
        }
        cur = next;
    }
    out[0] = S::pow2_half(-w_scale) * delta * cur[0].clone();
    out
}

fn synthesize_1d<S: Scalar>(c: &[S], w_scale: i32) -> Vec<S> {
    let n = c.len();
    let mut val = vec![c[0].clone() * S::pow2_half(-w_scale)];
    let mut depth = 0;
    while val.len() < n {
        let amp = S::pow2_half(-(w_scale - depth));
        let m = val.len();
        let mut next = Vec::with_capacity(2 * m);
        for (p, v) in val.iter().enumerate() {
            let d = c[m + p].clone() * amp.clone();
            next.push(v.clone() - d.clone());
            next.push(v.clone() + d);
        }
        val = next;
        depth += 1;
    }
    val
}

pub fn haar_analyze<S: Scalar>(f: &GridFunction<S>) -> GridCoefficients<S> {
    let shape = f.shape();
    let mut data = f.cells.clone();
    along_axes(&mut data, &shape, |j, line| {
        analyze_1d(line, f.window.sides[j].scale, f.resolution[j])
    });
    GridCoefficients {
        window: f.window.clone(),
        resolution: f.resolution.clone(),
        data,
    }
}

pub fn haar_synthesize<S: Scalar>(c: &GridCoefficients<S>) -> GridFunction<S> {
    let shape = grid_shape(&c.window, &c.resolution).expect("valid");
    let mut data = c.data.clone();
    along_axes(&mut data, &shape, |j, line| {
        synthesize_1d(line, c.window.sides[j].scale)
    });
    GridFunction {
        window: c.window.clone(),
        resolution: c.resolution.clone(),
        cells: data,
    }
}
