//! External interfaces: the JSON graph-spec schema, JSON reports, and the
//! band CSV.
//!
//! Graph-spec documents look like
//!
//! ```json
//! {
//!   "d": 2, "n": 3,
//!   "potential": [[0.0, 0.0], {"num": "1", "inum": "0"}, [1.0, 0.0]],
//!   "edges": [
//!     {"from": 1, "to": 2, "shift": [0, 0], "weight": [1.0, 0.0]}
//!   ],
//!   "autosymmetrize": true
//! }
//! ```
//!
//! Scalars are either `[re, im]` doubles (converted exactly — every finite
//! double is a dyadic rational) or `{"num": "a/b", "inum": "c/d"}` exact
//! rational strings. Vertex indices are 1-based in every document and
//! report. With `autosymmetrize`, missing reverse partners are filled in
//! with the conjugate weight under the negated shift before validation.

use crate::extremal::ObstructionCertificate;
use crate::flatband::{FlatBandReport, ProbeSummary};
use crate::floquet::BandSample;
use crate::graph::{EdgeTerm, PeriodicGraphSpec, Potential};
use crate::lattice::LatticeVector;
use crate::loops::{Footprint, ResummedTable, SeriesCheck};
use crate::scalar::{parse_rational, Gaussian};
use num_complex::Complex64;
use serde_json::{json, Map, Value};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("ParseError: {0}")]
    Io(#[from] std::io::Error),
    #[error("ParseError at line {line}, column {column}: {message}")]
    Json { message: String, line: usize, column: usize },
    #[error("ParseError at {path}: {message}")]
    Field { path: String, message: String },
    #[error("ParseError RankMismatch at {path}: shift has {found} components, expected d = {expected}")]
    RankMismatch { path: String, expected: usize, found: usize },
}

fn field<'v>(v: &'v Value, key: &str, path: &str) -> Result<&'v Value, ParseError> {
    v.get(key).ok_or_else(|| ParseError::Field {
        path: path.to_string(),
        message: format!("missing field {key:?}"),
    })
}

fn as_usize(v: &Value, path: &str) -> Result<usize, ParseError> {
    v.as_u64().map(|u| u as usize).ok_or_else(|| ParseError::Field {
        path: path.to_string(),
        message: format!("expected a nonnegative integer, got {v}"),
    })
}

fn parse_scalar(v: &Value, path: &str) -> Result<Gaussian, ParseError> {
    match v {
        Value::Array(parts) if parts.len() == 2 => {
            let re = parts[0].as_f64().ok_or_else(|| ParseError::Field {
                path: format!("{path}[0]"),
                message: "expected a double".into(),
            })?;
            let im = parts[1].as_f64().ok_or_else(|| ParseError::Field {
                path: format!("{path}[1]"),
                message: "expected a double".into(),
            })?;
            Gaussian::from_f64_pair(re, im).ok_or_else(|| ParseError::Field {
                path: path.to_string(),
                message: "non-finite double".into(),
            })
        }
        Value::Object(map) => {
            let num = map
                .get("num")
                .and_then(Value::as_str)
                .ok_or_else(|| ParseError::Field {
                    path: format!("{path}.num"),
                    message: "expected a rational string".into(),
                })?;
            let re = parse_rational(num).map_err(|message| ParseError::Field {
                path: format!("{path}.num"),
                message,
            })?;
            let im = match map.get("inum") {
                None => num::Zero::zero(),
                Some(Value::String(s)) => parse_rational(s).map_err(|message| {
                    ParseError::Field { path: format!("{path}.inum"), message }
                })?,
                Some(other) => {
                    return Err(ParseError::Field {
                        path: format!("{path}.inum"),
                        message: format!("expected a rational string, got {other}"),
                    })
                }
            };
            Ok(Gaussian::new(re, im))
        }
        other => Err(ParseError::Field {
            path: path.to_string(),
            message: format!("expected [re, im] or {{\"num\", \"inum\"}}, got {other}"),
        }),
    }
}

fn parse_shift(v: &Value, d: usize, path: &str) -> Result<LatticeVector, ParseError> {
    let arr = v.as_array().ok_or_else(|| ParseError::Field {
        path: path.to_string(),
        message: "expected an integer array".into(),
    })?;
    if arr.len() != d {
        return Err(ParseError::RankMismatch { path: path.to_string(), expected: d, found: arr.len() });
    }
    let comps = arr
        .iter()
        .enumerate()
        .map(|(k, c)| {
            c.as_i64().ok_or_else(|| ParseError::Field {
                path: format!("{path}[{k}]"),
                message: format!("expected an integer, got {c}"),
            })
        })
        .collect::<Result<Vec<i64>, _>>()?;
    Ok(LatticeVector::new(comps))
}

fn parse_vertex(v: &Value, n: usize, path: &str) -> Result<usize, ParseError> {
    let idx = as_usize(v, path)?;
    if idx == 0 || idx > n {
        return Err(ParseError::Field {
            path: path.to_string(),
            message: format!("vertex index {idx} outside 1..{n}"),
        });
    }
    Ok(idx - 1)
}

/// Parses a graph-spec document.
pub fn load_spec_str(text: &str) -> Result<PeriodicGraphSpec, ParseError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ParseError::Json {
        message: e.to_string(),
        line: e.line(),
        column: e.column(),
    })?;
    let d = as_usize(field(&v, "d", "$")?, "$.d")?;
    let n = as_usize(field(&v, "n", "$")?, "$.n")?;
    let pot_val = field(&v, "potential", "$")?;
    let pot_arr = pot_val.as_array().ok_or_else(|| ParseError::Field {
        path: "$.potential".into(),
        message: "expected an array".into(),
    })?;
    let potential = Potential::new(
        pot_arr
            .iter()
            .enumerate()
            .map(|(k, s)| parse_scalar(s, &format!("$.potential[{k}]")))
            .collect::<Result<Vec<_>, _>>()?,
    );
    let edges_val = field(&v, "edges", "$")?;
    let edges_arr = edges_val.as_array().ok_or_else(|| ParseError::Field {
        path: "$.edges".into(),
        message: "expected an array".into(),
    })?;
    let mut edges = Vec::with_capacity(edges_arr.len());
    for (k, e) in edges_arr.iter().enumerate() {
        let path = format!("$.edges[{k}]");
        let from = parse_vertex(field(e, "from", &path)?, n, &format!("{path}.from"))?;
        let to = parse_vertex(field(e, "to", &path)?, n, &format!("{path}.to"))?;
        let shift = parse_shift(field(e, "shift", &path)?, d, &format!("{path}.shift"))?;
        let weight = parse_scalar(field(e, "weight", &path)?, &format!("{path}.weight"))?;
        edges.push(EdgeTerm::new(from, to, shift, weight));
    }
    if v.get("autosymmetrize").and_then(Value::as_bool).unwrap_or(false) {
        autosymmetrize(&mut edges);
    }
    Ok(PeriodicGraphSpec { d, n, edges, potential })
}

/// Adds the conjugate-reverse partner of every edge term that lacks one.
pub fn autosymmetrize(edges: &mut Vec<EdgeTerm>) {
    let existing: std::collections::BTreeSet<(usize, usize, LatticeVector)> =
        edges.iter().map(|e| (e.from, e.to, e.shift.clone())).collect();
    let mut added = Vec::new();
    for e in edges.iter() {
        let partner = (e.to, e.from, e.shift.neg());
        if !existing.contains(&partner) {
            added.push(EdgeTerm::new(partner.0, partner.1, partner.2, e.weight.conj()));
        }
    }
    edges.extend(added);
}

pub fn load_spec_path(path: &Path) -> Result<PeriodicGraphSpec, ParseError> {
    let text = std::fs::read_to_string(path)?;
    load_spec_str(&text)
}

/// Exact scalar as `{"num": "a/b", "inum": "c/d"}`.
pub fn gaussian_json(g: &Gaussian) -> Value {
    json!({ "num": g.re.to_string(), "inum": g.im.to_string() })
}

/// Numeric scalar as `[re, im]`.
pub fn c64_json(c: Complex64) -> Value {
    json!([c.re, c.im])
}

pub fn shift_json(s: &LatticeVector) -> Value {
    Value::Array(s.components().iter().map(|&c| Value::from(c)).collect())
}

/// Footprint as `[[vertex, multiplicity], ...]`, vertices 1-based.
pub fn footprint_json(f: &Footprint) -> Value {
    Value::Array(
        f.iter()
            .map(|(&v, &m)| Value::Array(vec![Value::from(v as u64 + 1), Value::from(m as u64)]))
            .collect(),
    )
}

/// Re-emits a spec in the document schema (exact scalars).
pub fn spec_to_json(spec: &PeriodicGraphSpec) -> Value {
    json!({
        "d": spec.d,
        "n": spec.n,
        "potential": spec.potential.values().iter().map(gaussian_json).collect::<Vec<_>>(),
        "edges": spec.edges.iter().map(|e| json!({
            "from": e.from + 1,
            "to": e.to + 1,
            "shift": shift_json(&e.shift),
            "weight": gaussian_json(&e.weight),
        })).collect::<Vec<_>>(),
    })
}

pub fn flatband_report_json(report: &FlatBandReport, seed: Option<u64>) -> Value {
    let mut obj = Map::new();
    obj.insert(
        "flat_bands".into(),
        Value::Array(
            report
                .energies
                .iter()
                .map(|e| match &e.exact {
                    Some(x) => json!({ "energy": gaussian_json(x), "exact": true }),
                    None => json!({ "energy": c64_json(e.numeric), "exact": false }),
                })
                .collect(),
        ),
    );
    obj.insert("gcd_degree".into(), Value::from(report.gcd_degree() as u64));
    obj.insert("method".into(), Value::from(report.method.name()));
    if let Some(s) = seed {
        obj.insert("seed".into(), Value::from(s));
    }
    Value::Object(obj)
}

pub fn table_json(table: &ResummedTable) -> Value {
    json!({
        "base": table.base + 1,
        "order": table.order,
        "entries": table.entries.iter().map(|(key, entry)| json!({
            "footprint": footprint_json(&key.footprint),
            "quasi": shift_json(&key.quasi),
            "totalcont": gaussian_json(&entry.totalcont),
            "configs": entry.configs,
        })).collect::<Vec<_>>(),
    })
}

pub fn certificate_json(cert: &ObstructionCertificate) -> Value {
    json!({
        "base": cert.base + 1,
        "L": cert.extremal_length,
        "order": cert.order,
        "branch": cert.branch.name(),
        "footprint": footprint_json(&cert.footprint),
        "quasi": shift_json(&cert.quasi),
        "totalcont": gaussian_json(&cert.totalcont),
        "norm_ties": cert.norm_ties.iter().map(shift_json).collect::<Vec<_>>(),
    })
}

pub fn probe_json(summary: &ProbeSummary) -> Value {
    json!({
        "trials": summary.trials,
        "hits": summary.hits,
        "seed": summary.seed,
        "sampler": summary.sampler,
        "witnesses": summary.witnesses.iter().map(|w| json!({
            "trial": w.trial,
            "potential": w.potential.values().iter().map(gaussian_json).collect::<Vec<_>>(),
            "energies": w.energies.iter().map(|e| match &e.exact {
                Some(x) => json!({ "energy": gaussian_json(x), "exact": true }),
                None => json!({ "energy": c64_json(e.numeric), "exact": false }),
            }).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn series_json(
    check: &SeriesCheck,
    base: usize,
    order: usize,
    z: &[Complex64],
    eps: &[f64],
) -> Value {
    json!({
        "base": base + 1,
        "order": order,
        "z": z.iter().map(|&c| c64_json(c)).collect::<Vec<_>>(),
        "epsilons": eps,
        "slope": check.slope,
        "expected_slope_at_least": order + 1,
        "max_error": check.max_error,
        "errors": check.samples.iter().map(|&(e, err)| json!([e, err])).collect::<Vec<_>>(),
        "coefficients_at_z": check.coefficients.iter().map(|&c| c64_json(c)).collect::<Vec<_>>(),
    })
}

pub fn simple_loop_json(l: &crate::loops::SimpleLoop) -> Value {
    json!({
        "base": l.base + 1,
        "steps": l.steps.iter().map(|s| json!({
            "to": s.to + 1,
            "shift": shift_json(&s.shift),
        })).collect::<Vec<_>>(),
        "quasi": shift_json(&l.quasi()),
    })
}

pub fn extremal_json(
    search: &crate::extremal::ExtremalSearch,
    symmetric: Option<&crate::extremal::SymmetricExtremals>,
) -> Value {
    json!({
        "base": search.base + 1,
        "L": search.length,
        "distinct_footprint": search.distinct_footprint,
        "extremals": search.loops.iter().map(simple_loop_json).collect::<Vec<_>>(),
        "symmetric_extremals": symmetric.map(|s| json!({
            "length": s.length,
            "count": s.configs.len(),
        })),
    })
}

pub fn connectivity_json(g: &crate::graph::ValidatedGraph) -> Value {
    use crate::graph::ConnectivityCertificate;
    let (gamma, cert) = g.is_gamma_connected();
    let (multi, witnesses) = g.is_multi_connected();
    let cert_json = match cert {
        ConnectivityCertificate::Connected => json!({ "kind": "connected" }),
        ConnectivityCertificate::DisconnectedQuotient { components } => json!({
            "kind": "disconnected_quotient",
            "components": components.iter().map(|comp| {
                comp.iter().map(|v| v + 1).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        }),
        ConnectivityCertificate::ProperSublattice { basis } => json!({
            "kind": "proper_sublattice",
            "basis": basis.iter().map(shift_json).collect::<Vec<_>>(),
        }),
    };
    json!({
        "gamma_connected": gamma,
        "certificate": cert_json,
        "multi_connected": multi,
        "witnesses": witnesses.iter().map(|w| json!({
            "from": w.from + 1,
            "to": w.to + 1,
            "shifts": w.shifts.iter().map(shift_json).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn validate_json(g: &crate::graph::ValidatedGraph) -> Value {
    json!({
        "valid": true,
        "d": g.d(),
        "n": g.n(),
        "edge_terms": g.edges().len(),
        "self_adjoint": g.is_self_adjoint(),
        "shift_support": g.quotient().shift_support().map(shift_json).collect::<Vec<_>>(),
        "weight_bound": g.quotient().weight_bound(),
    })
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("NotSelfAdjoint: the band CSV carries real energies; this spec is not self-adjoint")]
    NotSelfAdjoint,
}

/// CSV with header `theta_1,…,theta_d,E_1,…,E_N`, one row per grid point.
pub fn band_csv(sample: &BandSample) -> Result<String, ReportError> {
    if !sample.self_adjoint {
        return Err(ReportError::NotSelfAdjoint);
    }
    let d = sample.grid.first().map(Vec::len).unwrap_or(0);
    let n = sample.energies.first().map(Vec::len).unwrap_or(0);
    let mut out = String::new();
    for k in 1..=d {
        out.push_str(&format!("theta_{k},"));
    }
    let header: Vec<String> = (1..=n).map(|k| format!("E_{k}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (theta, row) in sample.grid.iter().zip(&sample.energies) {
        let mut cells: Vec<String> = theta.iter().map(|t| format!("{t}")).collect();
        cells.extend(row.iter().map(|e| format!("{}", e.re)));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}
