//! Command-line front end of `dyalab`.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dyalab_core::atom::AtomKind;
use dyalab_core::grid::to_grid;
use dyalab_core::norms::{
    bmo_dyadic, bmo_product, bmo_rect, bmo_restricted, lp_norm, square_function, sup_haar_ratio, NormReport,
    SearchBudget, Witness,
};
use dyalab_core::{DyadicInterval, DyadicRectangle, ExactFunction};

use crate::config::{Scenario, ScenarioConfig};
use crate::error::RunError;
use crate::funcio;
use crate::report::{emit, parse_formats, ReportRecord};
use crate::scenarios;

#[derive(Parser, Debug)]
#[command(name = "dyalab", version, about = "Dyadic commutator and paraproduct experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Directory for reports (overrides the config's output_dir).
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Seed (overrides the config's seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long, default_value = "csv,json,svg")]
    pub format: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormKind {
    Lp,
    Bmo,
    BmoRec,
    BmoProd,
    #[value(name = "bmo-B")]
    BmoB,
    Sq,
    HaarRatio,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact identity suite (scenario verify-decomposition).
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// A norm of a function read from JSON.
    Norm {
        #[arg(long, value_enum)]
        kind: NormKind,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        p: Option<f64>,
        /// Coordinates of the set for bmo-B, e.g. `0` or `0,1`.
        #[arg(long, default_value = "0")]
        b_set: String,
        #[command(flatten)]
        common: Common,
    },
    /// One operator-norm lower bound.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Any scenario.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Closed forms against truncated-sum oracles.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dyalab: {e}");
            e.exit_code()
        }
    }
}

fn load_config(path: &Path, common: &Common) -> Result<ScenarioConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = ScenarioConfig::parse(&text)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(d) = &common.output_dir {
        cfg.output_dir = d.display().to_string();
    }
    Ok(cfg)
}

fn set_threads(common: &Common) -> Result<(), RunError> {
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Usage(format!("--threads: {e}")))?;
    }
    Ok(())
}

fn finish(rec: &ReportRecord, cfg: &ScenarioConfig, common: &Common) -> Result<i32, RunError> {
    let formats = parse_formats(&common.format)?;
    let files = emit(rec, Path::new(&cfg.output_dir), &formats)?;
    println!(
        "{}: {} rows, status {:?}{}",
        rec.scenario,
        rec.rows.len(),
        rec.status,
        if rec.flags.is_empty() { String::new() } else { format!(", {} flags", rec.flags.len()) }
    );
    for (k, v) in &rec.brackets {
        println!("  {k} = {v}");
    }
    for f in &rec.flags {
        println!("  flag: {f}");
    }
    for f in files {
        println!("  wrote {}", f.display());
    }
    Ok(rec.status.exit_code())
}

fn dispatch(cmd: Command) -> Result<i32, RunError> {
    match cmd {
        Command::Verify { config, common } => {
            set_threads(&common)?;
            let cfg = load_config(&config, &common)?;
            if cfg.name != Scenario::VerifyDecomposition {
                return Err(RunError::Config(format!(
                    "verify runs scenario verify-decomposition, not {}",
                    cfg.name
                )));
            }
            let rec = scenarios::run(&cfg)?;
            finish(&rec, &cfg, &common)
        }
        Command::Experiment { config, common } => {
            set_threads(&common)?;
            let cfg = load_config(&config, &common)?;
            let rec = scenarios::run(&cfg)?;
            finish(&rec, &cfg, &common)
        }
        Command::Estimate { config, common } => {
            set_threads(&common)?;
            let cfg = load_config(&config, &common)?;
            let rec = scenarios::estimate(&cfg)?;
            finish(&rec, &cfg, &common)
        }
        Command::Oracle { config, common } => {
            set_threads(&common)?;
            let cfg = load_config(&config, &common)?;
            let rec = scenarios::oracle_suite(&cfg)?;
            finish(&rec, &cfg, &common)
        }
        Command::Norm {
            kind,
            input,
            p,
            b_set,
            common,
        } => {
            set_threads(&common)?;
            let text =
                std::fs::read_to_string(&input).map_err(|e| RunError::Io(format!("{}: {e}", input.display())))?;
            let f = funcio::parse(&text)?;
            let out = norm(&f, kind, p, &b_set, common.seed.unwrap_or(0))?;
            let body = serde_json::to_string_pretty(&out).expect("json") + "\n";
            print!("{body}");
            if let Some(dir) = &common.output_dir {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("norm.json"), body)?;
            }
            Ok(0)
        }
    }
}

fn witness_text(w: &Witness) -> String {
    match w {
        Witness::None => String::new(),
        Witness::Interval(i) => i.to_string(),
        Witness::Rectangle(r) => r.to_string(),
        Witness::Union(rs) => rs.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" u "),
    }
}

fn report_json(kind: &str, r: &NormReport) -> serde_json::Value {
    json!({
        "kind": kind,
        "value": r.value,
        "method": r.method.as_str(),
        "witness": witness_text(&r.witness),
        "budget_used": r.budget_used,
    })
}

/// The dyadic windows containing the support of `f`, one per orthant the
/// support meets, and a resolution fine enough for every atom.
fn support_windows(f: &ExactFunction) -> Result<(Vec<DyadicRectangle>, Vec<i32>), RunError> {
    let d = f.dim();
    let mut sides: Vec<[Option<DyadicInterval>; 2]> = vec![[None, None]; d];
    let mut res = vec![i32::MIN; d];
    for (_, atoms) in f.terms() {
        for (j, a) in atoms.iter().enumerate() {
            if a.kind() == AtomKind::AscendingTail {
                return Err(RunError::Config("grid norms need a compactly supported function".into()));
            }
            let r = a.jump_region();
            let slot = &mut sides[j][usize::from(!r.is_nonnegative())];
            *slot = Some(match slot {
                None => r,
                Some(s) => s.join(&r).expect("same half-line"),
            });
            res[j] = res[j].max(-a.jump_scale());
        }
    }
    let mut windows: Vec<Vec<DyadicInterval>> = vec![Vec::new()];
    for s in &sides {
        let opts: Vec<DyadicInterval> = s.iter().flatten().copied().collect();
        windows = windows
            .into_iter()
            .flat_map(|w| {
                opts.iter().map(move |o| {
                    let mut w = w.clone();
                    w.push(*o);
                    w
                })
            })
            .collect();
    }
    let windows: Vec<DyadicRectangle> = windows.into_iter().map(DyadicRectangle::new).collect();
    for (j, r) in res.iter_mut().enumerate() {
        let coarsest = windows.iter().map(|w| w.sides[j].scale).max().unwrap_or(0);
        *r = (*r).max(-coarsest);
    }
    Ok((windows, res))
}

fn grid_norm(f: &ExactFunction, p: f64, square: bool) -> Result<f64, RunError> {
    if f.is_zero() {
        return Ok(0.0);
    }
    let (windows, res) = support_windows(f)?;
    let mut acc = 0.0f64;
    for w in &windows {
        let g = to_grid(f, w, &res)?;
        let v = if square { square_function(&g, p) } else { lp_norm(&g, p) };
        acc = if p.is_infinite() { acc.max(v) } else { acc + v.powf(p) };
    }
    Ok(if p.is_infinite() { acc } else { acc.powf(1.0 / p) })
}

pub fn norm(f: &ExactFunction, kind: NormKind, p: Option<f64>, b_set: &str, seed: u64) -> Result<serde_json::Value, RunError> {
    let budget = SearchBudget {
        seed,
        ..SearchBudget::default()
    };
    let p = p.unwrap_or(2.0);
    Ok(match kind {
        NormKind::Lp => json!({"kind": "lp", "p": p, "value": grid_norm(f, p, false)?}),
        NormKind::Sq => json!({"kind": "sq", "p": p, "value": grid_norm(f, p, true)?}),
        NormKind::Bmo => report_json("bmo", &bmo_dyadic(f)?),
        NormKind::BmoRec => report_json("bmo-rec", &bmo_rect(f)?),
        NormKind::BmoProd => report_json("bmo-prod", &bmo_product(f, &budget)?),
        NormKind::BmoB => {
            let set: BTreeSet<usize> = b_set
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| RunError::Usage(format!("--b-set {b_set:?}")))?;
            report_json("bmo-B", &bmo_restricted(f, &set, &budget)?)
        }
        NormKind::HaarRatio => {
            let (v, r) = sup_haar_ratio(f)?;
            json!({"kind": "haar-ratio", "value": v, "witness": r.map_or(String::new(), |r| r.to_string())})
        }
    })
}
