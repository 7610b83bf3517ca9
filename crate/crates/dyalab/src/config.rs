//! Scenario configuration: flat `key = value` lines under one `[scenario]`
//! header. Rationals are written `n/d`, booleans `true`/`false`, lists are
//! comma separated.

use std::fmt;
use std::str::FromStr;

use dyalab_core::scale::ScaleParam;
use dyalab_core::{ExactScale, QSqrt2, Scalar};

use crate::error::RunError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    VerifyDecomposition,
    Chanillo1d,
    FirstLower,
    EtaLower,
    DkBound,
    ParaBmoEquivalence,
    AtomDuality,
    MultiUpper,
    RectLower,
    SeparatedRectangles,
    RieszIndicatorDiagnostic,
}

impl Scenario {
    pub const ALL: [Scenario; 11] = [
        Scenario::VerifyDecomposition,
        Scenario::Chanillo1d,
        Scenario::FirstLower,
        Scenario::EtaLower,
        Scenario::DkBound,
        Scenario::ParaBmoEquivalence,
        Scenario::AtomDuality,
        Scenario::MultiUpper,
        Scenario::RectLower,
        Scenario::SeparatedRectangles,
        Scenario::RieszIndicatorDiagnostic,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::VerifyDecomposition => "verify-decomposition",
            Scenario::Chanillo1d => "chanillo-1d",
            Scenario::FirstLower => "firstlower",
            Scenario::EtaLower => "eta-lower",
            Scenario::DkBound => "dk-bound",
            Scenario::ParaBmoEquivalence => "para-bmo-equivalence",
            Scenario::AtomDuality => "atom-duality",
            Scenario::MultiUpper => "multi-upper",
            Scenario::RectLower => "rect-lower",
            Scenario::SeparatedRectangles => "separated-rectangles",
            Scenario::RieszIndicatorDiagnostic => "riesz-indicator-diagnostic",
        }
    }

    /// Scenarios whose operator is a commutator `L^p -> L^q`, so the
    /// exponents must satisfy the scaling relation.
    pub fn is_commutator(&self) -> bool {
        matches!(
            self,
            Scenario::Chanillo1d
                | Scenario::FirstLower
                | Scenario::EtaLower
                | Scenario::MultiUpper
                | Scenario::RectLower
                | Scenario::SeparatedRectangles
        )
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| format!("unknown scenario {s:?}"))
    }
}

/// Operators accepted by `estimate`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Commutator,
    Riesz,
    ParaB,
    ParaBAdjoint,
    ParaC,
    ParaD,
    Multiply,
}

impl OperatorKind {
    const ALL: [OperatorKind; 7] = [
        OperatorKind::Commutator,
        OperatorKind::Riesz,
        OperatorKind::ParaB,
        OperatorKind::ParaBAdjoint,
        OperatorKind::ParaC,
        OperatorKind::ParaD,
        OperatorKind::Multiply,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            OperatorKind::Commutator => "commutator",
            OperatorKind::Riesz => "riesz",
            OperatorKind::ParaB => "para-b",
            OperatorKind::ParaBAdjoint => "para-b-adjoint",
            OperatorKind::ParaC => "para-c",
            OperatorKind::ParaD => "para-d",
            OperatorKind::Multiply => "multiply",
        }
    }
}

impl FromStr for OperatorKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        OperatorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown operator {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: Scenario,
    pub dim: usize,
    /// One value per coordinate, or a single value used for all. For
    /// `verify-decomposition` and `riesz-indicator-diagnostic` this is the
    /// pool of values cases are drawn from.
    pub lambda: Vec<QSqrt2>,
    pub p: f64,
    /// `None` means derived: from the scaling relation for commutators,
    /// `q = p` otherwise.
    pub q: Option<f64>,
    /// The window is `[0, 2^window_scale)^dim`.
    pub window_scale: i32,
    /// Grid cells have side `2^-resolution`.
    pub resolution: i32,
    /// Levels of the window tree used for random symbols.
    pub depth: u32,
    /// Haar terms per random symbol.
    pub terms: usize,
    pub seed: u64,
    pub corpus_size: usize,
    pub cases: usize,
    pub eigen_cases: usize,
    pub restarts: usize,
    pub iters: usize,
    /// Largest rectangle family searched exhaustively for product BMO.
    pub budget: usize,
    pub eta: f64,
    pub k_max: u32,
    pub spacing_log2: u32,
    pub n_values: Vec<usize>,
    pub oracle_depth: u32,
    pub operator: OperatorKind,
    pub k: u32,
    /// Symbol file for `estimate`; empty means a generated symbol.
    pub input: String,
    pub strict_convergence: bool,
    pub output_dir: String,
}

impl ScenarioConfig {
    pub fn new(name: Scenario) -> Self {
        ScenarioConfig {
            name,
            dim: 1,
            lambda: vec![QSqrt2::ratio(3, 4)],
            p: 2.0,
            q: None,
            window_scale: 0,
            resolution: 6,
            depth: 5,
            terms: 6,
            seed: 1,
            corpus_size: 20,
            cases: 100,
            eigen_cases: 50,
            restarts: 8,
            iters: 500,
            budget: 14,
            eta: 0.6,
            k_max: 3,
            spacing_log2: 10,
            n_values: vec![1, 2, 4, 8],
            oracle_depth: 60,
            operator: OperatorKind::Commutator,
            k: 0,
            input: String::new(),
            strict_convergence: false,
            output_dir: "out".to_string(),
        }
    }

    /// `lambda` for coordinate `j`.
    pub fn lambda_at(&self, j: usize) -> &QSqrt2 {
        if self.lambda.len() == 1 {
            &self.lambda[0]
        } else {
            &self.lambda[j]
        }
    }

    pub fn scales(&self) -> Result<Vec<ExactScale>, RunError> {
        (0..self.dim)
            .map(|j| ScaleParam::new(self.lambda_at(j).clone()).map_err(RunError::from_config))
            .collect()
    }

    /// `alpha_j = 1 + log2(lambda_j)`.
    pub fn alphas(&self) -> Vec<f64> {
        (0..self.dim).map(|j| 1.0 + self.lambda_at(j).to_f64().log2()).collect()
    }

    /// The target exponent, derived when not given.
    pub fn q_value(&self) -> f64 {
        match self.q {
            Some(q) => q,
            None if self.name.is_commutator() => {
                1.0 / (1.0 / self.p - 1.0 + self.alphas().iter().sum::<f64>())
            }
            None => self.p,
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: String| Err(RunError::Config(m));
        if self.dim == 0 || self.dim > 3 {
            return bad(format!("dim = {} must be 1, 2 or 3", self.dim));
        }
        if self.lambda.is_empty() {
            return bad("lambda needs at least one value".into());
        }
        for l in &self.lambda {
            if ScaleParam::new(l.clone()).is_err() {
                return bad(format!("lambda = {l} is outside (1/2, 1)"));
            }
        }
        let pooled = matches!(
            self.name,
            Scenario::VerifyDecomposition | Scenario::RieszIndicatorDiagnostic
        );
        if !pooled && self.lambda.len() != 1 && self.lambda.len() != self.dim {
            return bad(format!(
                "lambda has {} values for dim = {}",
                self.lambda.len(),
                self.dim
            ));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad(format!("p = {} must be in (1, inf)", self.p));
        }
        let required = match self.name {
            Scenario::Chanillo1d | Scenario::FirstLower | Scenario::EtaLower | Scenario::DkBound => Some(1),
            Scenario::MultiUpper | Scenario::RectLower | Scenario::SeparatedRectangles => Some(2),
            Scenario::ParaBmoEquivalence | Scenario::AtomDuality if self.dim > 2 => {
                return bad("dim must be 1 or 2".into())
            }
            _ => None,
        };
        if let Some(d) = required {
            if self.dim != d {
                return bad(format!("{} runs in dim = {d}", self.name));
            }
        }
        if self.name.is_commutator() {
            let q = self.q_value();
            let r = 1.0 - self.alphas().iter().sum::<f64>() + 1.0 / q - 1.0 / self.p;
            if !(q > self.p && q.is_finite()) || r.abs() > 1e-12 {
                return bad(format!(
                    "exponents p = {}, q = {q} violate 1 - sum(alpha) + 1/q = 1/p (residual {r:e})",
                    self.p
                ));
            }
        } else if let Some(q) = self.q {
            if !(q > 1.0 && q.is_finite()) {
                return bad(format!("q = {q} must be in (1, inf)"));
            }
        }
        if self.resolution < -self.window_scale {
            return bad("resolution is coarser than the window".into());
        }
        if self.depth as i32 > self.resolution + self.window_scale {
            return bad(format!(
                "depth = {} needs cells of side at most 2^-{}",
                self.depth,
                self.depth as i32 - self.window_scale
            ));
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return bad("n_values must be positive".into());
        }
        if self.restarts == 0 && self.name != Scenario::VerifyDecomposition {
            return bad("restarts must be positive".into());
        }
        Ok(())
    }

    /// Writes every key in a fixed order.
    pub fn serialize(&self) -> String {
        let list = |v: &[String]| v.join(", ");
        let mut out = String::from("[scenario]\n");
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("name", self.name.to_string());
        kv("dim", self.dim.to_string());
        kv("lambda", list(&self.lambda.iter().map(|l| l.to_string()).collect::<Vec<_>>()));
        kv("p", self.p.to_string());
        kv("q", self.q.map_or("auto".into(), |q| q.to_string()));
        kv("window_scale", self.window_scale.to_string());
        kv("resolution", self.resolution.to_string());
        kv("depth", self.depth.to_string());
        kv("terms", self.terms.to_string());
        kv("seed", self.seed.to_string());
        kv("corpus_size", self.corpus_size.to_string());
        kv("cases", self.cases.to_string());
        kv("eigen_cases", self.eigen_cases.to_string());
        kv("restarts", self.restarts.to_string());
        kv("iters", self.iters.to_string());
        kv("budget", self.budget.to_string());
        kv("eta", self.eta.to_string());
        kv("k_max", self.k_max.to_string());
        kv("spacing_log2", self.spacing_log2.to_string());
        kv("n_values", list(&self.n_values.iter().map(|n| n.to_string()).collect::<Vec<_>>()));
        kv("oracle_depth", self.oracle_depth.to_string());
        kv("operator", self.operator.as_str().to_string());
        kv("k", self.k.to_string());
        kv("input", self.input.clone());
        kv("strict_convergence", self.strict_convergence.to_string());
        kv("output_dir", self.output_dir.clone());
        out
    }

    /// `(key, value)` pairs as written by [`serialize`](Self::serialize).
    pub fn params(&self) -> Vec<(String, String)> {
        self.serialize()
            .lines()
            .skip(1)
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self, RunError> {
        let mut seen_section = false;
        let mut pairs: Vec<(usize, String, String)> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') {
                if line != "[scenario]" {
                    return Err(RunError::Config(format!("line {}: unknown section {line}", n + 1)));
                }
                if seen_section {
                    return Err(RunError::Config(format!("line {}: second [scenario] section", n + 1)));
                }
                seen_section = true;
                continue;
            }
            if !seen_section {
                return Err(RunError::Config(format!("line {}: key outside [scenario]", n + 1)));
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| RunError::Config(format!("line {}: expected key = value", n + 1)))?;
            let k = k.trim().to_string();
            if pairs.iter().any(|(_, pk, _)| *pk == k) {
                return Err(RunError::Config(format!("line {}: duplicate key {k}", n + 1)));
            }
            pairs.push((n + 1, k, v.trim().to_string()));
        }
        let name = pairs
            .iter()
            .find(|(_, k, _)| k == "name")
            .ok_or_else(|| RunError::Config("missing key name".into()))?;
        let mut cfg = ScenarioConfig::new(name.2.parse().map_err(RunError::Config)?);
        for (line, k, v) in &pairs {
            let err = |m: String| RunError::Config(format!("line {line}: {k}: {m}"));
            fn num<T: FromStr>(v: &str) -> Result<T, String> {
                v.parse().map_err(|_| format!("cannot parse {v:?}"))
            }
            fn items(v: &str) -> impl Iterator<Item = &str> {
                v.split(',').map(str::trim).filter(|s| !s.is_empty())
            }
            match k.as_str() {
                "name" => {}
                "dim" => cfg.dim = num(v).map_err(err)?,
                "lambda" => {
                    cfg.lambda = items(v)
                        .map(|s| s.parse::<QSqrt2>())
                        .collect::<Result<_, _>>()
                        .map_err(err)?
                }
                "p" => cfg.p = num(v).map_err(err)?,
                "q" => cfg.q = if v == "auto" { None } else { Some(num(v).map_err(err)?) },
                "window_scale" => cfg.window_scale = num(v).map_err(err)?,
                "resolution" => cfg.resolution = num(v).map_err(err)?,
                "depth" => cfg.depth = num(v).map_err(err)?,
                "terms" => cfg.terms = num(v).map_err(err)?,
                "seed" => cfg.seed = num(v).map_err(err)?,
                "corpus_size" => cfg.corpus_size = num(v).map_err(err)?,
                "cases" => cfg.cases = num(v).map_err(err)?,
                "eigen_cases" => cfg.eigen_cases = num(v).map_err(err)?,
                "restarts" => cfg.restarts = num(v).map_err(err)?,
                "iters" => cfg.iters = num(v).map_err(err)?,
                "budget" => cfg.budget = num(v).map_err(err)?,
                "eta" => cfg.eta = num(v).map_err(err)?,
                "k_max" => cfg.k_max = num(v).map_err(err)?,
                "spacing_log2" => cfg.spacing_log2 = num(v).map_err(err)?,
                "n_values" => {
                    cfg.n_values = items(v).map(num).collect::<Result<_, _>>().map_err(err)?
                }
                "oracle_depth" => cfg.oracle_depth = num(v).map_err(err)?,
                "operator" => cfg.operator = v.parse().map_err(err)?,
                "k" => cfg.k = num(v).map_err(err)?,
                "input" => cfg.input = v.clone(),
                "strict_convergence" => {
                    cfg.strict_convergence = match v.as_str() {
                        "true" => true,
                        "false" => false,
                        _ => return Err(err("expected true or false".into())),
                    }
                }
                "output_dir" => cfg.output_dir = v.clone(),
                _ => return Err(RunError::Config(format!("line {line}: unknown key {k}"))),
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_derived_q() {
        let text = "# example\n[scenario]\nname = chanillo-1d\nlambda = 3/4\n";
        let cfg = ScenarioConfig::parse(text).unwrap();
        assert_eq!(ScenarioConfig::parse(&cfg.serialize()).unwrap(), cfg);
        assert!((cfg.q_value() - 11.76).abs() < 0.01);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "name = chanillo-1d\n",
            "[scenario]\nname = nope\n",
            "[scenario]\nname = chanillo-1d\nbogus = 1\n",
            "[scenario]\nname = chanillo-1d\np = 2\np = 3\n",
            "[scenario]\n[scenario]\nname = chanillo-1d\n",
        ] {
            assert!(ScenarioConfig::parse(text).is_err(), "{text}");
        }
        let mut cfg = ScenarioConfig::new(Scenario::Chanillo1d);
        cfg.q = Some(4.0);
        assert!(cfg.validate().is_err());
        cfg.q = None;
        cfg.lambda = vec![QSqrt2::ratio(1, 2)];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn irrational_lambda() {
        let cfg = ScenarioConfig::parse(
            "[scenario]\nname = riesz-indicator-diagnostic\nlambda = 3/4, 1/2*sqrt2\n",
        )
        .unwrap();
        assert_eq!(cfg.lambda[1], QSqrt2::sqrt2() * QSqrt2::ratio(1, 2));
        assert_eq!(ScenarioConfig::parse(&cfg.serialize()).unwrap(), cfg);
    }
}
