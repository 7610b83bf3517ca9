//! JSON interchange for exact functions: a list of terms
//! `{"coeff": "n/d", "factors": [{"kind", "scale", "pos", "eps"}]}`.
//!
//! `kind` is `haar`, `indicator` or `tail`; when it is absent, `eps = 1`
//! means Haar and `eps = 0` the indicator. Tails also carry `lambda`.

use serde::{Deserialize, Serialize};

use dyalab_core::atom::Atom1D;
use dyalab_core::scale::ScaleParam;
use dyalab_core::{DyadicInterval, ExactFunction, QSqrt2};

use crate::error::RunError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    pub factors: Vec<FactorJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub scale: i32,
    pub pos: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
}

fn factor_to_atom(f: &FactorJson) -> Result<Atom1D<QSqrt2>, String> {
    let i = DyadicInterval::new(f.scale, f.pos);
    let kind = match (f.kind.as_deref(), f.eps) {
        (Some(k), _) => k,
        (None, Some(1)) => "haar",
        (None, Some(0)) => "indicator",
        _ => return Err("factor needs kind or eps".into()),
    };
    match kind {
        "haar" => Ok(Atom1D::Haar(i)),
        "indicator" => Ok(Atom1D::Indicator(i)),
        "tail" => {
            let l: QSqrt2 = f.lambda.as_deref().ok_or("tail factor needs lambda")?.parse()?;
            Ok(Atom1D::Tail(i, ScaleParam::new(l).map_err(|e| e.to_string())?))
        }
        other => Err(format!("unknown factor kind {other:?}")),
    }
}

fn atom_to_factor(a: &Atom1D<QSqrt2>) -> FactorJson {
    let i = a.interval();
    let (kind, eps, lambda) = match a {
        Atom1D::Haar(_) => ("haar", Some(1), None),
        Atom1D::Indicator(_) => ("indicator", Some(0), None),
        Atom1D::Tail(_, l) => ("tail", None, Some(l.lambda().to_string())),
    };
    FactorJson {
        kind: Some(kind.to_string()),
        scale: i.scale,
        pos: i.pos,
        eps,
        lambda,
    }
}

pub fn from_terms(terms: &[TermJson]) -> Result<ExactFunction, RunError> {
    let first = terms
        .first()
        .ok_or_else(|| RunError::Config("function has no terms; the dimension is unknown".into()))?;
    let dim = first.factors.len();
    let parsed = terms
        .iter()
        .map(|t| {
            let c: QSqrt2 = t.coeff.parse().map_err(RunError::Config)?;
            let atoms = t
                .factors
                .iter()
                .map(factor_to_atom)
                .collect::<Result<Vec<_>, _>>()
                .map_err(RunError::Config)?;
            Ok((c, atoms))
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    ExactFunction::from_terms(dim, parsed).map_err(RunError::from_config)
}

pub fn to_terms(f: &ExactFunction) -> Vec<TermJson> {
    f.terms()
        .map(|(c, atoms)| TermJson {
            coeff: c.to_string(),
            factors: atoms.iter().map(atom_to_factor).collect(),
        })
        .collect()
}

pub fn parse(text: &str) -> Result<ExactFunction, RunError> {
    let terms: Vec<TermJson> =
        serde_json::from_str(text).map_err(|e| RunError::Config(format!("function json: {e}")))?;
    from_terms(&terms)
}

pub fn to_json(f: &ExactFunction) -> String {
    serde_json::to_string_pretty(&to_terms(f)).expect("terms serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_the_documented_shape() {
        let f = parse(
            r#"[{"coeff": "3/4", "factors": [{"kind": "haar", "scale": 0, "pos": 0, "eps": 1}]},
                {"coeff": "-1", "factors": [{"scale": -1, "pos": 1, "eps": 0}]}]"#,
        )
        .unwrap();
        let u = DyadicInterval::unit();
        let want = &ExactFunction::haar(u).scaled(&QSqrt2::ratio(3, 4))
            - &ExactFunction::indicator(DyadicInterval::new(-1, 1));
        assert_eq!(f, want);
        assert_eq!(parse(&to_json(&f)).unwrap(), f);
    }

    #[test]
    fn rejects_malformed_terms() {
        assert!(parse("[]").is_err());
        assert!(parse(r#"[{"coeff": "x", "factors": [{"scale": 0, "pos": 0, "eps": 1}]}]"#).is_err());
        assert!(parse(r#"[{"coeff": "1", "factors": [{"scale": 0, "pos": 0}]}]"#).is_err());
    }
}
