//! One-parameter scenarios: commutator lower bounds and paraproduct norms.

use dyalab_core::grid::to_grid;
use dyalab_core::norms::{bmo_dyadic, bmo_product, bmo_rect, lp_norm, sup_haar_ratio, Witness};
use dyalab_core::operators::{commutator_direct, OperatorSpec};
use dyalab_core::{DyadicInterval, DyadicRectangle, ExactFunction, ExactScale};

use super::{
    budget, cells, convergence_policy, estimate_op, min_max, par_cases, resolution, window, witness_start, R,
};
use crate::config::ScenarioConfig;
use crate::corpus::{corpus, full_tree_symbol, rng, CORPUS_STREAM};
use crate::report::{Cell, Plot, PlotKind, ReportRecord};

/// `||[M_b, I] 1_J||_{L^q(J)} / |J|^{1/p}`.
fn jchain(b: &ExactFunction, scales: &[ExactScale], j: &DyadicInterval, cfg: &ScenarioConfig) -> R<f64> {
    let g = commutator_direct(b, scales, &ExactFunction::indicator(*j))?;
    let jr = DyadicRectangle::new(vec![*j]);
    let grid = to_grid(&g, &jr, &resolution(cfg))?.to_f64();
    Ok(lp_norm(&grid, cfg.q_value()) / super::length_pow(j, 1.0 / cfg.p))
}

/// `||[M_b, I] h_I||_q / ||h_I||_p` on the window.
fn single_haar(b: &ExactFunction, scales: &[ExactScale], i: &DyadicInterval, cfg: &ScenarioConfig) -> R<f64> {
    let g = commutator_direct(b, scales, &ExactFunction::haar(*i))?;
    let grid = to_grid(&g, &window(cfg), &resolution(cfg))?.to_f64();
    Ok(lp_norm(&grid, cfg.q_value()) / super::length_pow(i, 1.0 / cfg.p - 0.5))
}

fn interval_of(w: &Witness) -> Option<DyadicInterval> {
    match w {
        Witness::Interval(i) => Some(*i),
        Witness::Rectangle(r) if r.dim() == 1 => Some(r.sides[0]),
        _ => None,
    }
}

fn scatter(title: &str, x: &str, y: &str, points: Vec<(f64, f64)>) -> Plot {
    Plot {
        kind: PlotKind::Scatter,
        title: title.into(),
        x_label: x.into(),
        y_label: y.into(),
        points,
    }
}

pub(super) fn chanillo(cfg: &ScenarioConfig) -> R<ReportRecord> {
    let symbols = corpus(cfg.seed, cfg.corpus_size, &window(cfg), cfg.depth, cfg.terms);
    let scales = cfg.scales()?;
    let (p, q) = (cfg.p, cfg.q_value());
    let results = par_cases(symbols.len(), |i| {
        let b = &symbols[i];
        let bmo = bmo_dyadic(b)?;
        let j = interval_of(&bmo.witness);
        let starts: Vec<Vec<f64>> = witness_start(&bmo.witness, cfg)?.into_iter().collect();
        let spec = OperatorSpec::Commutator {
            symbol: b.clone(),
            scales: scales.clone(),
        };
        let est = estimate_op(&spec, cfg, p, q, i, &starts)?;
        let chain = match &j {
            Some(j) => jchain(b, &scales, j, cfg)? / bmo.value,
            None => f64::NAN,
        };
        Ok((bmo.value, est, j, chain))
    })?;
    let mut rec = ReportRecord::new(
        cfg.name.as_str(),
        &["symbol_id", "bmo", "opnorm_lb", "ratio", "witness_ref"],
        cfg.params(),
        cfg.seed,
    );
    let mut converged = Vec::new();
    let mut points = Vec::new();
    for (i, (bmo, est, j, _)) in results.iter().enumerate() {
        let ratio = est.value / bmo;
        rec.push(vec![
            i.into(),
            (*bmo).into(),
            est.value.into(),
            ratio.into(),
            j.map_or(String::new(), |j| format!("1_J, J = {j}")).into(),
        ]);
        converged.push(est.converged);
        points.push((*bmo, est.value));
    }
    let (lo, hi) = min_max(rec.floats("ratio"));
    let (clo, chi) = min_max(results.iter().map(|r| r.3));
    rec.brackets.insert("ratio_min".into(), lo);
    rec.brackets.insert("ratio_max".into(), hi);
    rec.brackets.insert("jchain_min".into(), clo);
    rec.brackets.insert("jchain_max".into(), chi);
    rec.brackets.insert("q".into(), q);
    if !(lo > 0.0) {
        rec.flags.push("ratio bracket is not strictly positive".into());
    }
    convergence_policy(&mut rec, cfg, &converged);
    rec.plot = Some(scatter("commutator lower bound against dyadic BMO", "bmo", "opnorm_lb", points));
    Ok(rec)
}

pub(super) fn first_lower(cfg: &ScenarioConfig) -> R<ReportRecord> {
    let symbols = corpus(cfg.seed, cfg.corpus_size, &window(cfg), cfg.depth, cfg.terms);
    let scales = cfg.scales()?;
    let (p, q) = (cfg.p, cfg.q_value());
    let top = window(cfg).sides[0];
    let kappa = single_haar(&ExactFunction::haar(top), &scales, &top, cfg)?;
    let results = par_cases(symbols.len(), |i| {
        let b = &symbols[i];
        let (ratio, istar) = sup_haar_ratio(b)?;
        let istar = istar.map(|r| r.sides[0]).expect("nonzero symbol");
        let single = single_haar(b, &scales, &istar, cfg)?;
        let start = cells(&ExactFunction::haar(istar), cfg)?;
        let spec = OperatorSpec::Commutator {
            symbol: b.clone(),
            scales: scales.clone(),
        };
        let est = estimate_op(&spec, cfg, p, q, i, &[start])?;
        Ok((ratio, istar, single, est))
    })?;
    let mut rec = ReportRecord::new(
        cfg.name.as_str(),
        &["symbol_id", "sup_haar_ratio", "istar", "single_haar", "opnorm_lb", "bound", "pass"],
        cfg.params(),
        cfg.seed,
    );
    let mut converged = Vec::new();
    let mut worst = f64::INFINITY;
    for (i, (ratio, istar, single, est)) in results.iter().enumerate() {
        let bound = 0.5 * ratio * kappa;
        let pass = est.value >= bound;
        worst = worst.min(est.value / (ratio * kappa));
        rec.push(vec![
            i.into(),
            (*ratio).into(),
            istar.to_string().into(),
            (*single).into(),
            est.value.into(),
            bound.into(),
            pass.into(),
        ]);
        converged.push(est.converged);
        if !pass {
            rec.flags.push(format!("symbol {i}: lower bound {} below {bound}", est.value));
        }
    }
    rec.brackets.insert("kappa".into(), kappa);
    rec.brackets.insert("min_ratio_over_kappa".into(), worst);
    convergence_policy(&mut rec, cfg, &converged);
    Ok(rec)
}

pub(super) fn eta_lower(cfg: &ScenarioConfig) -> R<ReportRecord> {
    let top = window(cfg).sides[0];
    let scales = cfg.scales()?;
    let (p, q) = (cfg.p, cfg.q_value());
    let mut g = rng(cfg.seed, CORPUS_STREAM);
    let mut symbols = Vec::new();
    let mut attempts = 0;
    while symbols.len() < cfg.corpus_size && attempts < 50 * cfg.corpus_size.max(1) {
        attempts += 1;
        let b = full_tree_symbol(&mut g, &top, cfg.depth);
        let bmo = bmo_dyadic(&b)?;
        let (ratio, _) = sup_haar_ratio(&b)?;
        if ratio / bmo.value <= cfg.eta {
            symbols.push((b, bmo));
        }
    }
    let results = par_cases(symbols.len(), |i| {
        let (b, bmo) = &symbols[i];
        let (ratio, _) = sup_haar_ratio(b)?;
        let starts: Vec<Vec<f64>> = witness_start(&bmo.witness, cfg)?.into_iter().collect();
        let comm = OperatorSpec::Commutator {
            symbol: b.clone(),
            scales: scales.clone(),
        };
        let est = estimate_op(&comm, cfg, p, q, i, &starts)?;
        let b_riesz = OperatorSpec::Compose(vec![
            OperatorSpec::ParaB(b.clone()),
            OperatorSpec::Riesz {
                scale: scales[0].clone(),
                coord: 0,
            },
        ]);
        let est_b = estimate_op(&b_riesz, cfg, p, q, i, &starts)?;
        let chain = match interval_of(&bmo.witness) {
            Some(j) => jchain(b, &scales, &j, cfg)? / bmo.value,
            None => f64::NAN,
        };
        Ok((bmo.value, ratio / bmo.value, est, est_b, chain))
    })?;
    let mut rec = ReportRecord::new(
        cfg.name.as_str(),
        &["symbol_id", "bmo", "sup_haar_ratio", "opnorm_lb", "b_riesz_lb", "jchain"],
        cfg.params(),
        cfg.seed,
    );
    let mut converged = Vec::new();
    for (i, (bmo, ratio, est, est_b, chain)) in results.iter().enumerate() {
        rec.push(vec![
            i.into(),
            1.0.into(),
            (*ratio).into(),
            (est.value / bmo).into(),
            (est_b.value / bmo).into(),
            (*chain).into(),
        ]);
        converged.extend([est.converged, est_b.converged]);
    }
    if symbols.len() < cfg.corpus_size {
        rec.flags.push(format!(
            "only {} of {} symbols met sup_haar_ratio <= {} after {attempts} draws",
            symbols.len(),
            cfg.corpus_size,
            cfg.eta
        ));
    }
    rec.brackets.insert("eta".into(), cfg.eta);
    rec.brackets.insert("opnorm_min".into(), min_max(rec.floats("opnorm_lb")).0);
    rec.brackets.insert("b_riesz_min".into(), min_max(rec.floats("b_riesz_lb")).0);
    rec.brackets.insert("jchain_min".into(), min_max(rec.floats("jchain")).0);
    rec.brackets.insert("accepted".into(), symbols.len() as f64);
    convergence_policy(&mut rec, cfg, &converged);
    rec.plot = Some(scatter(
        "normalized commutator bound against the Haar ratio",
        "sup_haar_ratio",
        "opnorm_lb",
        rec.floats("sup_haar_ratio").into_iter().zip(rec.floats("opnorm_lb")).collect(),
    ));
    Ok(rec)
}

pub(super) fn dk_bound(cfg: &ScenarioConfig) -> R<ReportRecord> {
    let symbols = corpus(cfg.seed, cfg.corpus_size, &window(cfg), cfg.depth, cfg.terms);
    let p = cfg.p;
    let ks: Vec<u32> = (0..=cfg.k_max).collect();
    let n = symbols.len() * ks.len();
    let results = par_cases(n, |case| {
        let (i, k) = (case / ks.len(), ks[case % ks.len()]);
        let b = &symbols[i];
        let (ratio, istar) = sup_haar_ratio(b)?;
        let istar = istar.map(|r| r.sides[0]).expect("nonzero symbol");
        let starts = vec![
            cells(&ExactFunction::haar(istar), cfg)?,
            cells(&ExactFunction::haar(istar.ancestor(k)), cfg)?,
        ];
        let spec = OperatorSpec::ParaD {
            k,
            symbol: b.clone(),
            coord: 0,
        };
        let est = estimate_op(&spec, cfg, p, p, case, &starts)?;
        Ok((i, k, ratio, est))
    })?;
    let mut rec = ReportRecord::new(
        cfg.name.as_str(),
        &["symbol_id", "k", "sup_haar_ratio", "opnorm_lb", "ratio"],
        cfg.params(),
        cfg.seed,
    );
    let mut ck = vec![0.0f64; ks.len()];
    let mut converged = Vec::new();
    for (i, k, ratio, est) in &results {
        let r = est.value / ratio;
        ck[*k as usize] = ck[*k as usize].max(r);
        rec.push(vec![(*i).into(), (*k).into(), (*ratio).into(), est.value.into(), r.into()]);
        converged.push(est.converged);
    }
    for (k, c) in ck.iter().enumerate() {
        rec.brackets.insert(format!("C_{k}"), *c);
        if k > 0 && *c > 1.1 * ck[k - 1] {
            rec.flags.push(format!("C_{k} = {c} grows past 1.1 C_{} = {}", k - 1, 1.1 * ck[k - 1]));
        }
    }
    rec.brackets.insert("C".into(), ck.iter().cloned().fold(0.0, f64::max));
    convergence_policy(&mut rec, cfg, &converged);
    Ok(rec)
}

pub(super) fn para_bmo(cfg: &ScenarioConfig) -> R<ReportRecord> {
    let symbols = corpus(cfg.seed, cfg.corpus_size, &window(cfg), cfg.depth, cfg.terms);
    let p = cfg.p;
    let q = cfg.q.unwrap_or(p);
    let results = par_cases(symbols.len(), |i| {
        let b = &symbols[i];
        let bmo = if cfg.dim == 1 { bmo_dyadic(b)? } else { bmo_product(b, &budget(cfg))? };
        let rect = bmo_rect(b)?;
        let mut starts: Vec<Vec<f64>> = witness_start(&bmo.witness, cfg)?.into_iter().collect();
        starts.extend(witness_start(&rect.witness, cfg)?);
        let est = estimate_op(&OperatorSpec::ParaB(b.clone()), cfg, p, q, i, &starts)?;
        Ok((bmo.value, rect.value, est))
    })?;
    let mut rec = ReportRecord::new(
        cfg.name.as_str(),
        &["symbol_id", "dim", "p", "bmo", "bmo_rect", "opnorm_lb", "ratio"],
        cfg.params(),
        cfg.seed,
    );
    let mut converged = Vec::new();
    for (i, (bmo, rect, est)) in results.iter().enumerate() {
        rec.push(vec![
            i.into(),
            cfg.dim.into(),
            p.into(),
            (*bmo).into(),
            (*rect).into(),
            est.value.into(),
            Cell::Float(est.value / bmo),
        ]);
        converged.push(est.converged);
    }
    let (lo, hi) = min_max(rec.floats("ratio"));
    rec.brackets.insert("ratio_min".into(), lo);
    rec.brackets.insert("ratio_max".into(), hi);
    if !(lo > 0.0) {
        rec.flags.push("lower constant is not positive".into());
    }
    convergence_policy(&mut rec, cfg, &converged);
    Ok(rec)
}
