//! JSON file formats for pencils and Frobenius data.
//!
//! Expressions are strings in the expression grammar; plain JSON integers are
//! accepted wherever an expression or constant is expected. Coordinate
//! indices (`unity_index`, the variable of an exponential generator) are
//! 1-based. Every file carries `"schema": 1` and unknown fields are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::parse::{parse_constant, parse_expr, ExpGen};
use crate::exactalg::{fmt_rational, Matrix, QPoly};
use crate::frobenius::FrobeniusData;
use crate::geometry::{ContraMetric, PencilData};
use crate::reconstruction::expgens_for;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Str(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Int(i) => i.to_string(),
            Scalar::Str(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PencilFile {
    pub schema: u32,
    pub n: usize,
    #[serde(default)]
    pub expgens: Vec<(usize, Scalar)>,
    pub g1: Vec<Vec<Scalar>>,
    pub g2: Vec<Vec<Scalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Scalar>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EulerFile {
    /// Row `α` holds the coefficients of `E^α` in `t^1..t^n`.
    pub linear: Vec<Vec<Scalar>>,
    pub constant: Vec<Scalar>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FrobeniusFile {
    pub schema: u32,
    pub n: usize,
    pub eta: Vec<Vec<Scalar>>,
    pub potential: Scalar,
    pub euler: EulerFile,
    pub unity_index: usize,
    pub d: Scalar,
    #[serde(default)]
    pub expgens: Vec<(usize, Scalar)>,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn check_schema(schema: u32) -> Result<()> {
    if schema != SCHEMA {
        return Err(Error::Input(format!("unsupported schema {schema}, expected {SCHEMA}")));
    }
    Ok(())
}

/// Prefixes the location of a parse error with the JSON field it came from.
fn in_field(field: &str, e: Error) -> Error {
    match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column,
            message: format!("{field}: {message}"),
        },
        Error::OutOfRing { line, column, message } => Error::OutOfRing {
            line,
            column,
            message: format!("{field}: {message}"),
        },
        other => other,
    }
}

fn read_expgens(n: usize, raw: &[(usize, Scalar)]) -> Result<Vec<ExpGen>> {
    raw.iter()
        .enumerate()
        .map(|(k, (var, rate))| {
            if *var == 0 || *var > n {
                return Err(Error::Input(format!("expgens[{k}]: variable {var} outside 1..={n}")));
            }
            let rate = parse_constant(&rate.text()).map_err(|e| in_field(&format!("expgens[{k}]"), e))?;
            Ok(ExpGen { var: var - 1, rate })
        })
        .collect()
}

fn write_expgens(gens: &[ExpGen]) -> Vec<(usize, Scalar)> {
    gens.iter()
        .map(|g| (g.var + 1, Scalar::Str(fmt_rational(&g.rate))))
        .collect()
}

fn read_square<T>(field: &str, n: usize, rows: &[Vec<Scalar>], f: impl Fn(&str) -> Result<T>) -> Result<Vec<Vec<T>>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Input(format!("{field} must be a {n}x{n} matrix")));
    }
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .enumerate()
                .map(|(j, s)| f(&s.text()).map_err(|e| in_field(&format!("{field}[{}][{}]", i + 1, j + 1), e)))
                .collect()
        })
        .collect()
}

fn expr_matrix(m: &[Vec<QPoly>]) -> Vec<Vec<Scalar>> {
    m.iter()
        .map(|r| r.iter().map(|p| Scalar::Str(p.to_string())).collect())
        .collect()
}

fn const_matrix(m: &Matrix) -> Vec<Vec<Scalar>> {
    m.iter()
        .map(|r| r.iter().map(|c| Scalar::Str(fmt_rational(c))).collect())
        .collect()
}

/// A pencil together with the exponential generators its expressions use.
#[derive(Clone, Debug)]
pub struct PencilInput {
    pub pencil: PencilData,
    pub expgens: Vec<ExpGen>,
}

pub fn parse_pencil(json: &str) -> Result<PencilInput> {
    let f: PencilFile = serde_json::from_str(json).map_err(json_error)?;
    check_schema(f.schema)?;
    let n = f.n;
    if n == 0 {
        return Err(Error::Input("n must be positive".into()));
    }
    let expgens = read_expgens(n, &f.expgens)?;
    let expr = |s: &str| parse_expr(s, n, &expgens);
    let g1 = ContraMetric::new(read_square("g1", n, &f.g1, expr)?)?;
    let g2 = ContraMetric::new(read_square("g2", n, &f.g2, expr)?)?;
    let mut pencil = PencilData::new(g1, g2)?;
    if let Some(t) = &f.tau {
        pencil = pencil.with_tau(expr(&t.text()).map_err(|e| in_field("tau", e))?);
    }
    if let Some(d) = &f.d {
        pencil = pencil.with_d(parse_constant(&d.text()).map_err(|e| in_field("d", e))?);
    }
    Ok(PencilInput { pencil, expgens })
}

pub fn pencil_file(p: &PencilData) -> PencilFile {
    let n = p.n();
    let g = |m: &ContraMetric| {
        (0..n)
            .map(|i| (0..n).map(|j| m.entry(i, j).clone()).collect())
            .collect::<Vec<Vec<_>>>()
    };
    let (g1, g2) = (g(&p.g1), g(&p.g2));
    let gens = expgens_for(g1.iter().chain(&g2).flatten().chain(&p.tau));
    PencilFile {
        schema: SCHEMA,
        n,
        expgens: write_expgens(&gens),
        g1: expr_matrix(&g1),
        g2: expr_matrix(&g2),
        tau: p.tau.as_ref().map(|t| Scalar::Str(t.to_string())),
        d: p.d.as_ref().map(|d| Scalar::Str(fmt_rational(d))),
    }
}

pub fn parse_frobenius(json: &str) -> Result<FrobeniusData> {
    let f: FrobeniusFile = serde_json::from_str(json).map_err(json_error)?;
    check_schema(f.schema)?;
    let n = f.n;
    if n == 0 {
        return Err(Error::Input("n must be positive".into()));
    }
    if f.unity_index == 0 || f.unity_index > n {
        return Err(Error::Input(format!("unity_index {} outside 1..={n}", f.unity_index)));
    }
    if f.euler.constant.len() != n {
        return Err(Error::Input(format!("euler.constant must have {n} entries")));
    }
    let expgens = read_expgens(n, &f.expgens)?;
    let m = FrobeniusData {
        n,
        eta: read_square("eta", n, &f.eta, parse_constant)?,
        potential: parse_expr(&f.potential.text(), n, &expgens).map_err(|e| in_field("potential", e))?,
        euler_linear: read_square("euler.linear", n, &f.euler.linear, parse_constant)?,
        euler_constant: f
            .euler
            .constant
            .iter()
            .enumerate()
            .map(|(i, s)| parse_constant(&s.text()).map_err(|e| in_field(&format!("euler.constant[{}]", i + 1), e)))
            .collect::<Result<_>>()?,
        unity_index: f.unity_index - 1,
        d: parse_constant(&f.d.text()).map_err(|e| in_field("d", e))?,
        expgens,
    };
    m.validate()?;
    Ok(m)
}

pub fn frobenius_file(m: &FrobeniusData) -> FrobeniusFile {
    FrobeniusFile {
        schema: SCHEMA,
        n: m.n,
        eta: const_matrix(&m.eta),
        potential: Scalar::Str(m.potential.to_string()),
        euler: EulerFile {
            linear: const_matrix(&m.euler_linear),
            constant: m.euler_constant.iter().map(|c| Scalar::Str(fmt_rational(c))).collect(),
        },
        unity_index: m.unity_index + 1,
        d: Scalar::Str(fmt_rational(&m.d)),
        expgens: write_expgens(&m.expgens),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
