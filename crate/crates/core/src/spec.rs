//! Model-spec files: a single JSON document describing the Laurent data,
//! the profile parameters, grids, and the ε-ladder.
//!
//! ```json
//! {
//!   "m": 2, "n": 1,
//!   "alphas": [ { "dth1": 1.0 }, {} ],
//!   "beta":   [ [0, { "dth2^dth3": 1.0 }] ],
//!   "gamma":  {},
//!   "profile": { "j": 4, "tail_mode": "corrected" },
//!   "grids":   { "x_points": 401, "theta_points": 16, "x_max": 0.9 },
//!   "eps_ladder": [0.2, 0.1, 0.05, 0.025]
//! }
//! ```
//!
//! A form table maps basis strings ("dth1", "dth2^dth3", …) to
//! coefficients; a coefficient is either a number or a list of terms
//! `{ "amp": a, "xpow": p, "trig": [["sin", angle, freq], …] }`.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::desing::GridSpec;
use crate::error::{Error, Result};
use crate::forms::{Form, Harmonic, PolyTrig, ScalarField, TrigPoly};
use crate::model::LaurentModel;
use crate::profile::{build_even_profile, build_odd_profile, Profile, TailMode};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Coeff {
    Number(f64),
    Terms(Vec<Term>),
}

#[derive(Debug, Deserialize)]
struct Term {
    amp: f64,
    #[serde(default)]
    xpow: usize,
    #[serde(default)]
    trig: Vec<(String, usize, u32)>,
}

#[derive(Debug, Deserialize)]
struct ProfileSpec {
    #[serde(default)]
    j: Option<usize>,
    #[serde(default)]
    tail_mode: Option<String>,
}

#[derive(Debug, Deserialize)]
struct GridsSpec {
    #[serde(default)]
    x_points: Option<usize>,
    #[serde(default)]
    theta_points: Option<usize>,
    #[serde(default)]
    x_max: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct RawSpec {
    m: usize,
    n: usize,
    alphas: Vec<BTreeMap<String, Coeff>>,
    #[serde(default)]
    beta: Vec<(usize, BTreeMap<String, Coeff>)>,
    #[serde(default)]
    gamma: Option<BTreeMap<String, Coeff>>,
    #[serde(default)]
    profile: Option<ProfileSpec>,
    #[serde(default)]
    grids: Option<GridsSpec>,
    #[serde(default)]
    eps_ladder: Option<Vec<f64>>,
    #[serde(default)]
    label: Option<String>,
}

/// Run configuration carried alongside the model and profile.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub eps_ladder: Vec<f64>,
}

fn spec_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Spec(format!("{field}: {msg}"))
}

// "dth2^dth3" → [2, 3]
fn parse_basis(s: &str, degree: usize, dim: usize, field: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = s.split('^').collect();
    if parts.len() != degree {
        return Err(spec_err(field, format!("basis '{s}' must have {degree} factor(s)")));
    }
    let mut axes = Vec::with_capacity(degree);
    for p in parts {
        let idx: usize = p
            .strip_prefix("dth")
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| spec_err(field, format!("unknown basis factor '{p}' (want dthN)")))?;
        if idx < 1 || idx >= dim {
            return Err(spec_err(field, format!("dth{idx} out of range for n with dim {dim}")));
        }
        axes.push(idx);
    }
    if axes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(spec_err(field, format!("basis '{s}' must be strictly increasing")));
    }
    Ok(axes)
}

fn parse_coeff(c: &Coeff, field: &str) -> Result<ScalarField> {
    match c {
        Coeff::Number(v) => Ok(ScalarField::Constant(*v)),
        Coeff::Terms(terms) => {
            let mut acc = PolyTrig::zero();
            for t in terms {
                let mut harmonics = Vec::new();
                for (kind, angle, freq) in &t.trig {
                    let h = match kind.as_str() {
                        "sin" => Harmonic::Sin(*freq),
                        "cos" => Harmonic::Cos(*freq),
                        other => {
                            return Err(spec_err(field, format!("unknown harmonic '{other}'")))
                        }
                    };
                    if *angle < 1 {
                        return Err(spec_err(field, "trig angle indices start at 1"));
                    }
                    harmonics.push((*angle, h));
                }
                acc = acc.add(&PolyTrig::x_power_trig(
                    t.xpow,
                    TrigPoly::monomial(t.amp, &harmonics),
                ));
            }
            Ok(ScalarField::PolyTrig(acc))
        }
    }
}

fn parse_form(
    table: &BTreeMap<String, Coeff>,
    degree: usize,
    dim: usize,
    field: &str,
) -> Result<Form> {
    let mut form = Form::zero(dim, degree);
    for (basis, coeff) in table {
        let axes = parse_basis(basis, degree, dim, field)?;
        form = form.with_term(&axes, parse_coeff(coeff, field)?);
    }
    Ok(form)
}

/// Parse a model-spec document into a model, a matching profile, and the
/// run configuration.
pub fn parse_model_spec(text: &str) -> Result<(LaurentModel, Profile, RunConfig)> {
    let raw: RawSpec =
        serde_json::from_str(text).map_err(|e| Error::Spec(format!("syntax: {e}")))?;
    let dim = 2 * raw.n;
    if raw.alphas.len() != raw.m {
        return Err(spec_err(
            "alphas",
            format!("expected m={} Laurent coefficients, got {}", raw.m, raw.alphas.len()),
        ));
    }

    let mut alphas = Vec::with_capacity(raw.m);
    for (i, table) in raw.alphas.iter().enumerate() {
        alphas.push(parse_form(table, 1, dim, &format!("alphas[{i}]"))?);
    }
    let mut betas = vec![Form::zero(dim, 2); raw.m];
    for (j, table) in &raw.beta {
        if *j >= raw.m {
            return Err(spec_err("beta", format!("index {j} >= m={}", raw.m)));
        }
        betas[*j] = parse_form(table, 2, dim, &format!("beta[{j}]"))?;
    }
    let gamma = match &raw.gamma {
        Some(table) => parse_form(table, 1, dim, "gamma")?,
        None => Form::zero(dim, 1),
    };
    let label = raw.label.clone().unwrap_or_else(|| format!("spec(m={},n={})", raw.m, raw.n));
    let model = LaurentModel::new(raw.m, raw.n, alphas, betas, gamma, label)
        .map_err(|e| Error::Spec(e.to_string()))?;

    // profile: k implied by m
    let k = raw.m / 2;
    let default_j = 2 * k + 2;
    let (j, tail_mode) = match &raw.profile {
        Some(p) => {
            let tm = match p.tail_mode.as_deref() {
                None | Some("corrected") => TailMode::Corrected,
                Some("paper-literal") => TailMode::PaperLiteral,
                Some(other) => {
                    return Err(spec_err("profile.tail_mode", format!("unknown mode '{other}'")))
                }
            };
            (p.j.unwrap_or(default_j), tm)
        }
        None => (default_j, TailMode::Corrected),
    };
    let profile = if raw.m % 2 == 0 {
        build_even_profile(k, j)?
    } else {
        build_odd_profile(k, j, tail_mode)?
    };

    let mut grid = GridSpec::default();
    if let Some(g) = &raw.grids {
        if let Some(x) = g.x_points {
            grid.x_points = x;
        }
        if let Some(t) = g.theta_points {
            grid.theta_points = t;
        }
        if let Some(m) = g.x_max {
            grid.x_max = m;
        }
    }
    let eps_ladder = raw.eps_ladder.unwrap_or_else(|| vec![0.2, 0.1, 0.05, 0.025]);
    if eps_ladder.is_empty() {
        return Err(spec_err("eps_ladder", "must be nonempty"));
    }
    if eps_ladder.iter().any(|&e| !(e > 0.0 && e < 0.5)) {
        return Err(spec_err("eps_ladder", "all values must lie in (0, 1/2)"));
    }
    if eps_ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(spec_err("eps_ladder", "must be strictly decreasing"));
    }

    Ok((model, profile, RunConfig { grid, eps_ladder }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::ChartPoint;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parses_darboux_equivalent() {
        let text = r#"{ "m": 2, "n": 1, "alphas": [ { "dth1": 1.0 }, {} ] }"#;
        let (model, profile, cfg) = parse_model_spec(text).unwrap();
        assert_eq!((model.m(), model.n()), (2, 1));
        assert_eq!(profile.k(), 1);
        assert_eq!(cfg.eps_ladder, vec![0.2, 0.1, 0.05, 0.025]);
        let p = ChartPoint::new(0.5, &[0.3]).unwrap();
        let darboux = LaurentModel::darboux(2, 1);
        assert_eq!(
            model.raw_bm_form(&p).unwrap(),
            darboux.raw_bm_form(&p).unwrap()
        );
    }

    #[test]
    fn wrong_alpha_count_is_error() {
        let text = r#"{ "m": 2, "n": 1, "alphas": [ {"dth1":1}, {}, {} ] }"#;
        let err = parse_model_spec(text).unwrap_err();
        assert!(matches!(err, Error::Spec(_)), "{err}");
        assert!(err.to_string().contains("m=2"), "{err}");
    }

    #[test]
    fn gamma_defaults_to_zero() {
        let text = r#"{ "m": 1, "n": 1, "alphas": [ { "dth1": 1.0 } ] }"#;
        let (model, _, _) = parse_model_spec(text).unwrap();
        let p = ChartPoint::new(0.2, &[0.1]).unwrap();
        assert_eq!(model.gamma().evaluate(&p).norm_max(), 0.0);
    }

    #[test]
    fn trig_terms_and_beta() {
        let text = r#"{
            "m": 2, "n": 2,
            "alphas": [ { "dth1": 1.0 }, {} ],
            "beta": [
                [0, { "dth2^dth3": 1.0 }],
                [1, { "dth2^dth3": [ { "amp": 0.5, "trig": [["cos", 2, 1]] } ] }]
            ],
            "eps_ladder": [0.2, 0.1]
        }"#;
        let (model, _, cfg) = parse_model_spec(text).unwrap();
        let p = ChartPoint::new(0.3, &[0.1, 0.0, 0.7]).unwrap();
        // β at p: dθ2∧dθ3 coefficient 1 + x·0.5·cos(0)
        let beta = model.beta_value(&p).unwrap();
        assert_abs_diff_eq!(beta.coefficient(&[2, 3]), 1.0 + 0.3 * 0.5, epsilon = 1e-14);
        assert_eq!(cfg.eps_ladder.len(), 2);
    }

    #[test]
    fn odd_m_gives_odd_profile() {
        let text = r#"{
            "m": 3, "n": 1,
            "alphas": [ { "dth1": 1.0 }, {}, {} ],
            "profile": { "tail_mode": "paper-literal" }
        }"#;
        let (model, profile, _) = parse_model_spec(text).unwrap();
        assert_eq!(model.m(), 3);
        assert_eq!(profile.m(), 3);
        assert_eq!(profile.tail_mode(), TailMode::PaperLiteral);
    }

    #[test]
    fn eps_ladder_validation() {
        let base = r#"{ "m": 2, "n": 1, "alphas": [ { "dth1": 1.0 }, {} ], "eps_ladder": LADDER }"#;
        for bad in ["[0.1, 0.2]", "[0.6, 0.1]", "[]", "[0.2, 0.2]"] {
            let text = base.replace("LADDER", bad);
            assert!(parse_model_spec(&text).is_err(), "ladder {bad} should fail");
        }
    }

    #[test]
    fn bad_basis_strings() {
        for bad in [
            r#"{ "m": 1, "n": 1, "alphas": [ { "dx": 1.0 } ] }"#,
            r#"{ "m": 1, "n": 1, "alphas": [ { "dth2": 1.0 } ] }"#,
            r#"{ "m": 1, "n": 2, "alphas": [ { "dth2^dth1": 1.0 } ] }"#,
        ] {
            assert!(matches!(parse_model_spec(bad), Err(Error::Spec(_))), "{bad}");
        }
    }

    #[test]
    fn syntax_error_reported() {
        let err = parse_model_spec("{ not json").unwrap_err();
        assert!(err.to_string().contains("syntax"), "{err}");
    }
}
