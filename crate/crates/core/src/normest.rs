//! Lower bounds for `L^p -> L^q` operator norms of windowed operators.
//!
//! An operator is assembled into a matrix acting on cell values; every
//! estimate is recomputed from the matrix at its witness, so it is a
//! certified lower bound on the norm of the truncated operator.

use rand::Rng;
use rand_pcg::Pcg32;
use rayon::prelude::*;

use crate::dyadic::{DyadicInterval, DyadicRectangle};
use crate::error::{DyadicError, Result};
use crate::function::DyadicFunction;
use crate::grid::{grid_shape, to_grid, GridFunction};
use crate::operators::{apply, OperatorSpec};
use crate::scalar::Scalar;

/// A windowed operator as a dense matrix, `rows = columns = cells`.
#[derive(Clone, Debug)]
pub struct TruncatedOperator<S: Scalar> {
    pub spec: OperatorSpec<S>,
    pub window: DyadicRectangle,
    pub resolution: Vec<i32>,
    /// Row-major: `matrix[out * n + input]`.
    pub matrix: Vec<S>,
    pub n: usize,
}

/// Column `i` is the restriction to the window of the operator applied to
/// the indicator of cell `i`.
pub fn assemble<S: Scalar>(
    spec: &OperatorSpec<S>,
    window: &DyadicRectangle,
    resolution: &[i32],
) -> Result<TruncatedOperator<S>> {
    let shape = grid_shape(window, resolution)?;
    let n: usize = shape.iter().product();
    let probe = GridFunction::<S>::zeros(window.clone(), resolution.to_vec())?;
    let columns: Vec<Vec<S>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let cell = probe.cell(i);
            let e = DyadicFunction::indicator_rect(&cell);
            let out = apply(spec, &e)?;
            Ok(to_grid(&out, window, resolution)?.into_cells())
        })
        .collect::<Result<_>>()?;
    let mut matrix = vec![S::zero(); n * n];
    for (i, col) in columns.into_iter().enumerate() {
        for (o, v) in col.into_iter().enumerate() {
            matrix[o * n + i] = v;
        }
    }
    Ok(TruncatedOperator {
        spec: spec.clone(),
        window: window.clone(),
        resolution: resolution.to_vec(),
        matrix,
        n,
    })
}

impl<S: Scalar> TruncatedOperator<S> {
    pub fn to_f64_matrix(&self) -> Matrix {
        Matrix {
            n: self.n,
            data: self.matrix.iter().map(|v| v.to_f64()).collect(),
            cell_volume: (-(self.resolution.iter().sum::<i32>()) as f64).exp2(),
        }
    }
}

/// A square float matrix on cell values with the grid's cell volume.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub n: usize,
    pub data: Vec<f64>,
    pub cell_volume: f64,
}

impl Matrix {
    pub fn new(n: usize, data: Vec<f64>, cell_volume: f64) -> Self {
        assert_eq!(data.len(), n * n);
        Matrix {
            n,
            data,
            cell_volume,
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, v) in d.iter().enumerate() {
            data[i * n + i] = *v;
        }
        Matrix::new(n, data, 1.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|v| v * c).collect(),
            cell_volume: self.cell_volume,
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|o| {
                self.data[o * self.n..(o + 1) * self.n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn mul_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (o, yo) in y.iter().enumerate() {
            if *yo == 0.0 {
                continue;
            }
            for (i, a) in self.data[o * self.n..(o + 1) * self.n].iter().enumerate() {
                out[i] += a * yo;
            }
        }
        out
    }

    /// `||T x||_q / ||x||_p` for the grid norms.
    pub fn ratio(&self, x: &[f64], p: f64, q: f64) -> f64 {
        let nx = seq_norm(x, p);
        if nx == 0.0 {
            return 0.0;
        }
        seq_norm(&self.mul(x), q) / nx * volume_factor(self.cell_volume, p, q)
    }
}

/// `(sum |x_i|^p)^{1/p}`
pub fn seq_norm(x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return x.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `v^{1/q - 1/p}`: converts sequence norms to grid `L^p` norms.
pub fn volume_factor(cell_volume: f64, p: f64, q: f64) -> f64 {
    cell_volume.powf(1.0 / q - 1.0 / p)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// Cell values of the witness, normalized in the grid `L^p` norm.
    pub witness: Vec<f64>,
    pub p: f64,
    pub q: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub converged: bool,
}

impl NormEstimate {
    pub fn witness_grid(&self, window: &DyadicRectangle, resolution: &[i32]) -> Result<GridFunction<f64>> {
        GridFunction::from_cells(window.clone(), resolution.to_vec(), self.witness.clone())
    }
}

fn normalize(x: &mut [f64], p: f64, cell_volume: f64) {
    let n = seq_norm(x, p) * cell_volume.powf(1.0 / p);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// Largest singular value by power iteration on `T^T T`.
pub fn opnorm_22(t: &Matrix) -> NormEstimate {
    const TOL: f64 = 1e-10;
    const MAX_ITERS: usize = 10_000;
    let n = t.n;
    // deterministic start with no symmetry to get stuck on
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.618_033_988_749_895).fract()).collect();
    let mut sigma = 0.0;
    let mut converged = false;
    let mut iters = 0;
    normalize(&mut x, 2.0, 1.0);
    while iters < MAX_ITERS {
        iters += 1;
        let mut y = t.mul_t(&t.mul(&x));
        let ny = seq_norm(&y, 2.0);
        if ny == 0.0 {
            converged = true;
            break;
        }
        y.iter_mut().for_each(|v| *v /= ny);
        let s = ny.sqrt();
        let change = (s - sigma).abs() / s.max(f64::MIN_POSITIVE);
        sigma = s;
        x = y;
        if change < TOL {
            converged = true;
            break;
        }
    }
    normalize(&mut x, 2.0, t.cell_volume);
    NormEstimate {
        value: t.ratio(&x, 2.0, 2.0),
        witness: x,
        p: 2.0,
        q: 2.0,
        iterations: iters,
        restarts: 1,
        seed: 0,
        converged,
    }
}

fn signed_pow(x: &[f64], e: f64) -> Vec<f64> {
    x.iter().map(|v| v.signum() * v.abs().powf(e)).collect()
}

/// Settings for [`opnorm_pq`].
#[derive(Clone, Debug, PartialEq)]
pub struct AscentConfig {
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            restarts: 8,
            iters: 500,
            seed: 0,
            tol: 1e-10,
        }
    }
}

/// Duality-map ascent `x <- Phi_p(T^T Psi_q(T x))` from the given starts
/// and from seeded random starts; the best witness is kept. A run stops
/// when the value moves by less than `tol` and the witness by less than
/// `sqrt(tol)`, both relative.
pub fn opnorm_pq(t: &Matrix, p: f64, q: f64, cfg: &AscentConfig, extra_starts: &[Vec<f64>]) -> NormEstimate {
    let pdual = p / (p - 1.0);
    let run = |start: Vec<f64>| -> (f64, Vec<f64>, usize, bool) {
        let mut x = start;
        normalize(&mut x, p, t.cell_volume);
        let mut best = (t.ratio(&x, p, q), x.clone());
        let mut prev = best.0;
        let mut converged = false;
        let mut it = 0;
        while it < cfg.iters {
            it += 1;
            let y = t.mul(&x);
            if seq_norm(&y, q) == 0.0 {
                converged = true;
                break;
            }
            let z = t.mul_t(&signed_pow(&y, q - 1.0));
            let mut nx = signed_pow(&z, pdual - 1.0);
            if seq_norm(&nx, p) == 0.0 {
                converged = true;
                break;
            }
            normalize(&mut nx, p, t.cell_volume);
            let step = nx.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let scale = seq_norm(&nx, f64::INFINITY);
            x = nx;
            let v = t.ratio(&x, p, q);
            if v > best.0 {
                best = (v, x.clone());
            }
            if (v - prev).abs() <= cfg.tol * v.abs().max(f64::MIN_POSITIVE) && step <= cfg.tol.sqrt() * scale {
                converged = true;
                break;
            }
            prev = v;
        }
        (best.0, best.1, it, converged)
    };
    let mut starts: Vec<Vec<f64>> = extra_starts.to_vec();
    for r in 0..cfg.restarts {
        // one stream per restart, so more restarts only add starts
        let mut rng = Pcg32::new(cfg.seed, r as u64);
        starts.push((0..t.n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }
    let results: Vec<_> = starts.into_par_iter().map(run).collect();
    let mut best: Option<(f64, Vec<f64>, usize, bool)> = None;
    let mut total_iters = 0;
    for r in results {
        total_iters += r.2;
        if best.as_ref().map_or(true, |b| r.0 > b.0) {
            best = Some(r);
        }
    }
    let (value, witness, _, converged) = best.unwrap_or((0.0, vec![0.0; t.n], 0, true));
    NormEstimate {
        value,
        witness,
        p,
        q,
        iterations: total_iters,
        restarts: cfg.restarts,
        seed: cfg.seed,
        converged,
    }
}

/// `q` from `1 - sum(alpha) + 1/q = 1/p`.
pub fn scaling_q(p: f64, alphas: &[f64]) -> Result<f64> {
    let inv_q = 1.0 / p - 1.0 + alphas.iter().sum::<f64>();
    if !(inv_q > 0.0 && inv_q < 1.0) {
        return Err(DyadicError::ScalingRelationViolated(inv_q));
    }
    Ok(1.0 / inv_q)
}

pub fn check_scaling(p: f64, q: f64, alphas: &[f64]) -> Result<()> {
    let r = 1.0 - alphas.iter().sum::<f64>() + 1.0 / q - 1.0 / p;
    if r.abs() > 1e-12 {
        return Err(DyadicError::ScalingRelationViolated(r));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub symbol_id: usize,
    pub opnorm_lb: f64,
    pub denom: f64,
    pub ratio: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioTable {
    pub rows: Vec<RatioRow>,
    pub min: f64,
    pub max: f64,
}

/// Operator-norm lower bounds against a norm of the symbol, per symbol.
#[allow(clippy::too_many_arguments)]
pub fn ratio_experiment<S: Scalar>(
    symbols: &[DyadicFunction<S>],
    template: impl Fn(&DyadicFunction<S>) -> OperatorSpec<S> + Sync,
    window: &DyadicRectangle,
    resolution: &[i32],
    p: f64,
    q: f64,
    alphas: &[f64],
    denom: impl Fn(&DyadicFunction<S>) -> Result<f64> + Sync,
    cfg: &AscentConfig,
) -> Result<RatioTable> {
    if symbols.is_empty() {
        return Err(DyadicError::EmptyCorpus);
    }
    check_scaling(p, q, alphas)?;
    let rows = symbols
        .iter()
        .enumerate()
        .map(|(id, b)| {
            let t = assemble(&template(b), window, resolution)?.to_f64_matrix();
            let est = opnorm_pq(&t, p, q, cfg, &[]);
            let d = denom(b)?;
            Ok(RatioRow {
                symbol_id: id,
                opnorm_lb: est.value,
                denom: d,
                ratio: if d > 0.0 { est.value / d } else { f64::NAN },
                converged: est.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let finite = rows.iter().map(|r| r.ratio).filter(|r| r.is_finite());
    let min = finite.clone().fold(f64::INFINITY, f64::min);
    let max = finite.fold(f64::NEG_INFINITY, f64::max);
    Ok(RatioTable { rows, min, max })
}

/// The interval `[0, 2^s)`.
pub fn anchored_window(d: usize, s: i32) -> DyadicRectangle {
    DyadicRectangle::cube(d, DyadicInterval::new(s, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::QSqrt2;
    use crate::scale::ScaleParam;

    #[test]
    fn diagonal_and_identity() {
        let d = Matrix::diagonal(&[3.0, 1.0]);
        assert!((opnorm_22(&d).value - 3.0).abs() < 1e-12);
        assert!((opnorm_22(&Matrix::diagonal(&[1.0; 4])).value - 1.0).abs() < 1e-12);
        for p in [1.5, 3.0] {
            let e = opnorm_pq(&d, p, p, &AscentConfig::default(), &[]);
            assert!((e.value - 3.0).abs() < 1e-9, "p = {p}: {}", e.value);
            assert!(e.witness[1].abs() < 1e-4, "{:?}", e.witness);
        }
    }

    #[test]
    fn multiply_by_one_is_identity() {
        let w = anchored_window(1, 0);
        let spec = OperatorSpec::Multiply(DyadicFunction::<QSqrt2>::indicator(DyadicInterval::unit()));
        let t = assemble(&spec, &w, &[2]).unwrap();
        for o in 0..4 {
            for i in 0..4 {
                let want = if o == i { QSqrt2::ratio(1, 1) } else { QSqrt2::ratio(0, 1) };
                assert_eq!(t.matrix[o * 4 + i], want);
            }
        }
    }

    #[test]
    fn riesz_matrix_is_symmetric() {
        let w = anchored_window(1, 0);
        let spec = OperatorSpec::Riesz {
            scale: ScaleParam::<QSqrt2>::from_ratio(3, 4).unwrap(),
            coord: 0,
        };
        let t = assemble(&spec, &w, &[3]).unwrap();
        for o in 0..8 {
            for i in 0..8 {
                assert_eq!(t.matrix[o * 8 + i], t.matrix[i * 8 + o]);
            }
        }
    }

    #[test]
    fn scaling_relation() {
        assert!(check_scaling(2.0, 4.0, &[0.75]).is_ok());
        assert!(matches!(
            check_scaling(2.0, 3.0, &[0.75]),
            Err(DyadicError::ScalingRelationViolated(_))
        ));
        let q = scaling_q(2.0, &[1.0 + 0.75f64.log2()]).unwrap();
        assert!((q - 11.76).abs() < 0.01);
    }
}
