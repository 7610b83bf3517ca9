//! Product-space scenarios: atoms, iterated commutators and separated
//! rectangles.

use std::collections::BTreeMap;

use rand::Rng;

use dyalab_core::grid::to_grid;
use dyalab_core::norms::{bmo_product, bmo_rect, lp_norm, OpenSetApprox};
use dyalab_core::operators::{para_b_adjoint, riesz_apply, OperatorSpec};
use dyalab_core::{DyadicInterval, DyadicPoint, DyadicRectangle, ExactFunction, One, QSqrt2, Scalar, Zero};

use super::{
    budget, convergence_policy, estimate_op, min_max, par_cases, resolution, window, witness_start, R,
};
use crate::config::{Scenario, ScenarioConfig};
use crate::corpus::{corpus, random_coefficient, random_descendant, rng, CORPUS_STREAM};
use crate::error::RunError;
use crate::report::{loglog_fit, Plot, PlotKind, ReportRecord, Status};

fn disjoint(a: &DyadicRectangle, b: &DyadicRectangle) -> bool {
    a.sides.iter().zip(&b.sides).any(|(x, y)| x.disjoint(y))
}

/// An atom supported on a union `A` of disjoint rectangles around a
/// symbol rectangle, with `||a||_2^2 |A| <= 1` checked exactly.
struct AtomCase {
    symbol: usize,
    area: QSqrt2,
    atom: ExactFunction,
    l2_area: QSqrt2,
    set: OpenSetApprox,
}

fn draw_atom(
    g: &mut rand_pcg::Pcg32,
    b: &ExactFunction,
    symbol: usize,
    cfg: &ScenarioConfig,
) -> R<AtomCase> {
    let w = window(cfg);
    let coeffs = b.haar_coefficients()?;
    let level = |s: &DyadicInterval, side: &DyadicInterval| (side.scale - s.scale) as u32;
    // first component: an ancestor of a symbol rectangle
    let (r0, _) = &coeffs[g.gen_range(0..coeffs.len())];
    let a0 = DyadicRectangle::new(
        r0.sides
            .iter()
            .zip(&w.sides)
            .map(|(s, top)| s.ancestor(g.gen_range(0..=2).min(level(s, top))))
            .collect(),
    );
    let mut parts = vec![a0];
    if g.gen_bool(0.5) {
        let extra = DyadicRectangle::new(
            w.sides.iter().map(|s| random_descendant(g, s, (cfg.depth / 2).max(1))).collect(),
        );
        if disjoint(&extra, &parts[0]) {
            parts.push(extra);
        }
    }
    let set = OpenSetApprox::new(parts.clone());
    let mut support: BTreeMap<DyadicRectangle, QSqrt2> = BTreeMap::new();
    let aligned = g.gen_bool(0.5);
    for (r, c) in &coeffs {
        if set.contains(r) {
            let v = if aligned { c.clone() } else { random_coefficient(g) };
            support.insert(r.clone(), v);
        }
    }
    for part in &parts {
        for _ in 0..4 {
            let r = DyadicRectangle::new(
                part.sides
                    .iter()
                    .zip(&w.sides)
                    .map(|(s, top)| {
                        let room = (cfg.depth as i32 - level(s, top) as i32).max(1) as u32;
                        random_descendant(g, s, room)
                    })
                    .collect(),
            );
            let c = random_coefficient(g);
            support.entry(r).or_insert(c);
        }
    }
    let area = parts.iter().fold(QSqrt2::zero(), |acc, r| acc + r.volume::<QSqrt2>());
    let sum_sq = support.values().fold(QSqrt2::zero(), |acc, c| acc + c.clone() * c.clone());
    // largest t = k / 2^16 with t^2 sum_sq |A| <= 1
    let mut k = ((65536.0_f64 / (sum_sq.to_f64() * area.to_f64()).sqrt()).floor() as i64).max(1);
    let l2_area = loop {
        let t = QSqrt2::ratio(k, 65536);
        let v = t.clone() * t * sum_sq.clone() * area.clone();
        if v <= QSqrt2::one() {
            break v;
        }
        k -= 1;
    };
    let t = QSqrt2::ratio(k, 65536);
    let mut atom = ExactFunction::zero(w.dim());
    for (r, c) in support {
        atom = &atom + &ExactFunction::haar_rect(&r).scaled(&(c * t.clone()));
    }
    Ok(AtomCase {
        symbol,
        area,
        atom,
        l2_area,
        set,
    })
}

pub(super) fn atom_duality(cfg: &ScenarioConfig) -> R<ReportRecord> {
    let w = window(cfg);
    let terms = cfg.terms.min(cfg.budget);
    let symbols = corpus(cfg.seed, cfg.corpus_size.max(1), &w, cfg.depth, terms);
    let mut g = rng(cfg.seed, CORPUS_STREAM ^ 1);
    let atoms = (0..cfg.cases)
        .map(|i| draw_atom(&mut g, &symbols[i % symbols.len()], i % symbols.len(), cfg))
        .collect::<R<Vec<_>>>()?;
    let bmos = par_cases(symbols.len(), |i| Ok(bmo_product(&symbols[i], &budget(cfg))?.value))?;
    let results = par_cases(atoms.len(), |i| {
        let a = &atoms[i];
        let b = &symbols[a.symbol];
        let out = para_b_adjoint(b, &a.atom)?;
        let lhs = lp_norm(&to_grid(&out, &w, &resolution(cfg))?.to_f64(), 1.0);
        let ac: BTreeMap<DyadicRectangle, QSqrt2> = a.atom.haar_coefficients()?.into_iter().collect();
        let mut cs = 0.0;
        let mut local = 0.0;
        for (r, c) in b.haar_coefficients()? {
            let c = c.to_f64();
            if let Some(x) = ac.get(&r) {
                cs += (c * x.to_f64()).abs();
            }
            if a.set.contains(&r) {
                local += c * c;
            }
        }
        Ok((lhs, cs, (local / a.area.to_f64()).sqrt()))
    })?;
    let mut rec = ReportRecord::new(
        cfg.name.as_str(),
        &[
            "atom_id",
            "symbol_id",
            "area",
            "atom_l2_sq_area",
            "lhs_l1",
            "cs_sum",
            "local_bmo",
            "bmo_product",
            "ratio",
            "pass",
        ],
        cfg.params(),
        cfg.seed,
    );
    for (i, (a, (lhs, cs, local))) in atoms.iter().zip(&results).enumerate() {
        let bmo = bmos[a.symbol];
        let pass = *lhs <= 1.0001 * bmo;
        if !pass {
            rec.flags.push(format!("atom {i}: {lhs} exceeds 1.0001 * {bmo}"));
        }
        rec.push(vec![
            i.into(),
            a.symbol.into(),
            a.area.to_f64().into(),
            a.l2_area.to_f64().into(),
            (*lhs).into(),
            (*cs).into(),
            (*local).into(),
            bmo.into(),
            (lhs / bmo).into(),
            pass.into(),
        ]);
    }
    rec.brackets.insert("ratio_max".into(), min_max(rec.floats("ratio")).1);
    Ok(rec)
}

/// `multi-upper` (denominator: product BMO) and `rect-lower` (rectangular
/// BMO) share the corpus and the estimates.
pub(super) fn multi_param(cfg: &ScenarioConfig) -> R<ReportRecord> {
    let symbols = corpus(cfg.seed, cfg.corpus_size, &window(cfg), cfg.depth, cfg.terms);
    let scales = cfg.scales()?;
    let (p, q) = (cfg.p, cfg.q_value());
    let results = par_cases(symbols.len(), |i| {
        let b = &symbols[i];
        let prod = bmo_product(b, &budget(cfg))?;
        let rect = bmo_rect(b)?;
        let mut starts: Vec<Vec<f64>> = witness_start(&prod.witness, cfg)?.into_iter().collect();
        starts.extend(witness_start(&rect.witness, cfg)?);
        let spec = OperatorSpec::Commutator {
            symbol: b.clone(),
            scales: scales.clone(),
        };
        let est = estimate_op(&spec, cfg, p, q, i, &starts)?;
        Ok((prod.value, rect.value, est))
    })?;
    let upper = cfg.name == Scenario::MultiUpper;
    let mut rec = ReportRecord::new(
        cfg.name.as_str(),
        &["symbol_id", "bmo_product", "bmo_rect", "opnorm_lb", "ratio"],
        cfg.params(),
        cfg.seed,
    );
    let mut converged = Vec::new();
    let mut points = Vec::new();
    for (i, (prod, rect, est)) in results.iter().enumerate() {
        let denom = if upper { *prod } else { *rect };
        rec.push(vec![
            i.into(),
            (*prod).into(),
            (*rect).into(),
            est.value.into(),
            (est.value / denom).into(),
        ]);
        converged.push(est.converged);
        points.push((denom, est.value));
    }
    let (lo, hi) = min_max(rec.floats("ratio"));
    rec.brackets.insert("ratio_min".into(), lo);
    rec.brackets.insert("ratio_max".into(), hi);
    rec.brackets.insert("q".into(), q);
    if upper {
        rec.brackets.insert("C".into(), hi);
    } else {
        rec.brackets.insert("c".into(), lo);
        if !(lo > 0.0) {
            rec.flags.push("rectangular lower constant is not positive".into());
        }
    }
    convergence_policy(&mut rec, cfg, &converged);
    let x = if upper { "bmo_product" } else { "bmo_rect" };
    rec.plot = Some(Plot {
        kind: PlotKind::Scatter,
        title: format!("iterated commutator lower bound against {x}"),
        x_label: x.into(),
        y_label: "opnorm_lb".into(),
        points,
    });
    Ok(rec)
}

/// Breakpoints of the shells around the unit intervals `J_n` up to the
/// common ancestor `[0, 2^m)`: `(left end, length)` of each piece.
fn shell_pieces(js: &[DyadicInterval], m: u32) -> Vec<(i64, i64)> {
    let mut cuts = vec![0i64, 1i64 << m];
    for j in js {
        for k in 0..=m {
            let a = j.ancestor(k);
            cuts.push(a.pos << a.scale);
            cuts.push((a.pos + 1) << a.scale);
        }
    }
    cuts.sort_unstable();
    cuts.dedup();
    cuts.windows(2).map(|c| (c[0], c[1] - c[0])).collect()
}

/// `||(I ⊗ I) 1_U||_q` for `U` the union of the squares `J_n × J_n`,
/// `J_n = [n 2^spacing, n 2^spacing + 1)`. Both factors are exact; the
/// shells outside `[0, 2^m)` are summed as geometric series.
fn separated_norm(cfg: &ScenarioConfig, n: usize, q: f64) -> R<(f64, bool)> {
    let scales = cfg.scales()?;
    let js: Vec<DyadicInterval> = (0..n).map(|i| DyadicInterval::new(0, (i as i64) << cfg.spacing_log2)).collect();
    let m = cfg.spacing_log2 + (usize::BITS - (n.max(1) - 1).leading_zeros());
    let pieces = shell_pieces(&js, m);
    let mut consistent = true;
    let mut per_coord = Vec::new();
    for lam in &scales {
        let gs = js
            .iter()
            .map(|j| riesz_apply(lam, &ExactFunction::indicator(*j), 0))
            .collect::<Result<Vec<_>, _>>()?;
        let at = |f: &ExactFunction, x: i64| f.eval(&[DyadicPoint::new(x, 0)]);
        let values: Vec<Vec<f64>> =
            pieces.iter().map(|(x, _)| gs.iter().map(|g| at(g, *x).to_f64()).collect()).collect();
        // beyond 2^m every factor takes the same value, shrinking by mu per shell
        let t = at(&gs[0], 1 << m);
        for g in &gs {
            consistent &= at(g, 1 << m) == t && at(g, 1 << (m + 1)) == t.clone() * lam.mu() && at(g, -1).is_zero();
        }
        per_coord.push((values, t.to_f64(), lam.mu().to_f64()));
    }
    let (vx, tx, mux) = &per_coord[0];
    let (vy, ty, muy) = &per_coord[1];
    let geo = |t: f64, mu: f64| -> R<f64> {
        let r = 2.0 * mu.powf(q);
        if r >= 1.0 {
            return Err(RunError::Config(format!("q = {q} too small for a finite L^q norm")));
        }
        Ok(t.powf(q) * (m as f64).exp2() / (1.0 - r))
    };
    let (gx, gy) = (geo(*tx, *mux)?, geo(*ty, *muy)?);
    let mut total = 0.0;
    for ((_, wa), va) in pieces.iter().zip(vx) {
        for ((_, wb), vb) in pieces.iter().zip(vy) {
            let f: f64 = va.iter().zip(vb).map(|(a, b)| a * b).sum();
            total += (*wa as f64) * (*wb as f64) * f.abs().powf(q);
        }
    }
    for ((_, wa), va) in pieces.iter().zip(vx) {
        total += (*wa as f64) * va.iter().sum::<f64>().abs().powf(q) * gy;
    }
    for ((_, wb), vb) in pieces.iter().zip(vy) {
        total += (*wb as f64) * vb.iter().sum::<f64>().abs().powf(q) * gx;
    }
    total += (n as f64).powf(q) * gx * gy;
    Ok((total.powf(1.0 / q), consistent))
}

pub(super) fn separated(cfg: &ScenarioConfig) -> R<ReportRecord> {
    let (p, q) = (cfg.p, cfg.q_value());
    let mut rec = ReportRecord::new(
        cfg.name.as_str(),
        &["n_rects", "spacing_log2", "norm_q", "measure", "ratio", "ratio_rel"],
        cfg.params(),
        cfg.seed,
    );
    let results = par_cases(cfg.n_values.len(), |i| separated_norm(cfg, cfg.n_values[i], q))?;
    let mut base = None;
    let mut points = Vec::new();
    for (n, (norm, consistent)) in cfg.n_values.iter().zip(&results) {
        let ratio = norm / (*n as f64).powf(1.0 / p);
        if *n == 1 {
            base = Some(ratio);
        }
        let rel = base.map_or(f64::NAN, |b| ratio / b);
        if !consistent {
            rec.status = Status::IdentityFailure;
            rec.flags.push(format!("N = {n}: potential values outside the shells are not geometric"));
        }
        rec.push(vec![
            (*n).into(),
            cfg.spacing_log2.into(),
            (*norm).into(),
            (*n).into(),
            ratio.into(),
            rel.into(),
        ]);
        points.push((*n as f64, ratio));
    }
    let (slope, intercept) = loglog_fit(&points);
    let expected = 1.0 / q - 1.0 / p;
    rec.brackets.insert("slope".into(), slope);
    rec.brackets.insert("expected_slope".into(), expected);
    rec.brackets.insert("q".into(), q);
    if (slope - expected).abs() > 0.1 {
        rec.flags.push(format!("fitted slope {slope} differs from 1/q - 1/p = {expected} by more than 0.1"));
    }
    rec.plot = Some(Plot {
        kind: PlotKind::LogLogFit { slope, intercept },
        title: format!("separated squares, expected slope {expected:.4}"),
        x_label: "N".into(),
        y_label: "||(I ⊗ I) 1_U||_q / |U|^(1/p)".into(),
        points,
    });
    Ok(rec)
}
