//! Certificate records shared by every module.

use serde::Serialize;

use crate::error::Result;
use crate::exactalg::identity::first_nonzero;
use crate::exactalg::{fmt_rational, CheckMode, Matrix, QPoly, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// Outcome of one certified identity (or family of identities).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub name: String,
    pub status: Status,
    /// `exact`, `sampled(k)` or `skipped`.
    pub proof: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

const RESIDUAL_CHARS: usize = 160;

fn truncate(s: String) -> String {
    if s.chars().count() <= RESIDUAL_CHARS {
        s
    } else {
        let head: String = s.chars().take(RESIDUAL_CHARS).collect();
        format!("{head} ...")
    }
}

fn proof_label(mode: CheckMode) -> String {
    match mode {
        CheckMode::Exact => "exact".into(),
        CheckMode::Sampled { trials, .. } => format!("sampled({trials})"),
    }
}

impl Certificate {
    pub fn pass(name: impl Into<String>, mode: CheckMode) -> Self {
        Certificate {
            name: name.into(),
            status: Status::Pass,
            proof: proof_label(mode),
            witness: None,
            detail: None,
        }
    }

    pub fn fail(name: impl Into<String>, mode: CheckMode, witness: impl Into<String>) -> Self {
        Certificate {
            name: name.into(),
            status: Status::Fail,
            proof: proof_label(mode),
            witness: Some(witness.into()),
            detail: None,
        }
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Certificate {
            name: name.into(),
            status: Status::Skipped,
            proof: "skipped".into(),
            witness: None,
            detail: Some(reason.into()),
        }
    }

    /// A pass/fail certificate from a constant (rational) comparison.
    pub fn from_bool(name: impl Into<String>, ok: bool, witness: impl FnOnce() -> String) -> Self {
        if ok {
            Certificate::pass(name, CheckMode::Exact)
        } else {
            Certificate::fail(name, CheckMode::Exact, witness())
        }
    }

    /// Certifies that every entry vanishes identically. `label(i)` names
    /// entry `i` in the witness; `dens` are denominators to avoid when the
    /// entries are numerators of rational identities.
    pub fn vanishing(
        name: impl Into<String>,
        entries: &[QPoly],
        label: impl Fn(usize) -> String,
        dens: &[&QPoly],
        mode: CheckMode,
    ) -> Result<Self> {
        let name = name.into();
        Ok(match first_nonzero(entries, dens, mode)? {
            None => Certificate::pass(name, mode),
            Some((i, point)) => {
                let mut w = format!("{}: residual {}", label(i), truncate(entries[i].to_string()));
                if let Some(pt) = point {
                    w.push_str(&format!(" (nonzero at {})", pt.describe()));
                }
                Certificate::fail(name, mode, w)
            }
        })
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// 1-based index label such as `(1,2,1)`.
pub fn index_label(idx: &[usize]) -> String {
    let parts: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    format!("({})", parts.join(","))
}

/// Splits a flat index into `rank` coordinates of dimension `n`.
pub fn unflatten(mut flat: usize, n: usize, rank: usize) -> Vec<usize> {
    let mut out = vec![0; rank];
    for k in (0..rank).rev() {
        out[k] = flat % n;
        flat /= n;
    }
    out
}

pub fn all_pass(certs: &[Certificate]) -> bool {
    certs.iter().all(Certificate::passed)
}

pub(crate) fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(r))
}

pub(crate) fn ser_matrix<S: serde::Serializer>(m: &Matrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.len()))?;
    for row in m {
        let r: Vec<String> = row.iter().map(fmt_rational).collect();
        seq.serialize_element(&r)?;
    }
    seq.end()
}
