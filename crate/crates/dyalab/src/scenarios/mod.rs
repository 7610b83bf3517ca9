//! Scenario runners. Each builds its cases from the config and a seeded
//! generator, evaluates them (in parallel where cases are independent) and
//! returns a [`ReportRecord`] with rows in case order.

mod identity;
mod multi;
mod one_param;

use rayon::prelude::*;

use dyalab_core::grid::to_grid;
use dyalab_core::normest::{assemble, opnorm_pq, AscentConfig, NormEstimate};
use dyalab_core::norms::{SearchBudget, Witness};
use dyalab_core::{DyadicInterval, DyadicRectangle, ExactFunction, ExactOperator, Scalar};

use crate::config::{Scenario, ScenarioConfig};
use crate::error::RunError;
use crate::report::{ReportRecord, Status};

pub use identity::{estimate, oracle_suite};

pub type R<T> = Result<T, RunError>;

/// Runs the configured scenario.
pub fn run(cfg: &ScenarioConfig) -> R<ReportRecord> {
    cfg.validate()?;
    match cfg.name {
        Scenario::VerifyDecomposition => identity::verify_decomposition(cfg),
        Scenario::RieszIndicatorDiagnostic => identity::riesz_indicator(cfg),
        Scenario::Chanillo1d => one_param::chanillo(cfg),
        Scenario::FirstLower => one_param::first_lower(cfg),
        Scenario::EtaLower => one_param::eta_lower(cfg),
        Scenario::DkBound => one_param::dk_bound(cfg),
        Scenario::ParaBmoEquivalence => one_param::para_bmo(cfg),
        Scenario::AtomDuality => multi::atom_duality(cfg),
        Scenario::MultiUpper | Scenario::RectLower => multi::multi_param(cfg),
        Scenario::SeparatedRectangles => multi::separated(cfg),
    }
}

pub(crate) fn window(cfg: &ScenarioConfig) -> DyadicRectangle {
    DyadicRectangle::cube(cfg.dim, DyadicInterval::new(cfg.window_scale, 0))
}

pub(crate) fn resolution(cfg: &ScenarioConfig) -> Vec<i32> {
    vec![cfg.resolution; cfg.dim]
}

pub(crate) fn ascent(cfg: &ScenarioConfig, case: usize) -> AscentConfig {
    AscentConfig {
        restarts: cfg.restarts,
        iters: cfg.iters,
        seed: cfg.seed.wrapping_add(case as u64 + 1),
        tol: 1e-10,
    }
}

pub(crate) fn budget(cfg: &ScenarioConfig) -> SearchBudget {
    SearchBudget {
        exact_cap: cfg.budget,
        restarts: cfg.restarts,
        seed: cfg.seed,
    }
}

/// Cell values of `f` on the scenario grid.
pub(crate) fn cells(f: &ExactFunction, cfg: &ScenarioConfig) -> R<Vec<f64>> {
    Ok(to_grid(f, &window(cfg), &resolution(cfg))?.to_f64().into_cells())
}

/// Indicator of the union of the witness rectangles, as a start vector.
pub(crate) fn witness_start(w: &Witness, cfg: &ScenarioConfig) -> R<Option<Vec<f64>>> {
    let rects: Vec<DyadicRectangle> = match w {
        Witness::None => return Ok(None),
        Witness::Interval(i) => vec![DyadicRectangle::new(vec![*i])],
        Witness::Rectangle(r) => vec![r.clone()],
        Witness::Union(rs) => rs.clone(),
    };
    let mut out: Option<Vec<f64>> = None;
    for r in rects {
        let c = cells(&ExactFunction::indicator_rect(&r), cfg)?;
        out = Some(match out {
            None => c,
            Some(o) => o.iter().zip(&c).map(|(a, b)| a.max(*b)).collect(),
        });
    }
    Ok(out)
}

/// Lower bound for the windowed operator norm `L^p -> L^q`.
pub(crate) fn estimate_op(
    spec: &ExactOperator,
    cfg: &ScenarioConfig,
    p: f64,
    q: f64,
    case: usize,
    starts: &[Vec<f64>],
) -> R<NormEstimate> {
    let t = assemble(spec, &window(cfg), &resolution(cfg))?.to_f64_matrix();
    Ok(opnorm_pq(&t, p, q, &ascent(cfg, case), starts))
}

/// Evaluates `f(case)` for every case in parallel, keeping case order.
pub(crate) fn par_cases<T: Send>(n: usize, f: impl Fn(usize) -> R<T> + Sync + Send) -> R<Vec<T>> {
    (0..n).into_par_iter().map(f).collect()
}

/// Marks the record when estimates did not converge.
pub(crate) fn convergence_policy(rec: &mut ReportRecord, cfg: &ScenarioConfig, converged: &[bool]) {
    let bad = converged.iter().filter(|c| !**c).count();
    if bad > 0 {
        rec.flags.push(format!("{bad} of {} estimates did not converge", converged.len()));
        if cfg.strict_convergence && rec.status == Status::Ok {
            rec.status = Status::NonConvergence;
        }
    }
}

pub(crate) fn min_max(v: impl IntoIterator<Item = f64>) -> (f64, f64) {
    v.into_iter()
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
}

pub(crate) fn lambda_text(cfg: &ScenarioConfig) -> String {
    (0..cfg.dim).map(|j| cfg.lambda_at(j).to_string()).collect::<Vec<_>>().join(";")
}

pub(crate) fn length_pow(i: &DyadicInterval, e: f64) -> f64 {
    (i.scale as f64 * e).exp2()
}

pub(crate) fn f64_of<S: Scalar>(s: &S) -> f64 {
    s.to_f64()
}
