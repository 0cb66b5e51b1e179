//! AOINTS v1 text format.
//!
//! ```text
//! AOINTS v1
//! kind spatial          # or spinorbital
//! nbasis 2
//! nelec 2
//! eshift 0.0            # optional
//! label toy             # optional, rest of line
//! S 1 1 1.0
//! S 1 2 0.5
//! H 1 1 -1.0
//! G 1 1 2 2 0.5         # chemists' (11|22)
//! ```
//!
//! Indices are 1-based. Entries implied by symmetry are filled in; when an
//! equivalent entry is given more than once, all copies must agree. Omitted
//! entries are zero, except that every diagonal metric element is required.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{AoSystem, ParsedSystem, SpatialSystem, TwoElectronTensor};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const MAGIC: &str = "AOINTS v1";

/// Two explicit copies of one entry must agree to this (relative) tolerance.
const DUPLICATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    SpinOrbital,
    Spatial,
}

impl BasisKind {
    fn as_str(self) -> &'static str {
        match self {
            BasisKind::SpinOrbital => "spinorbital",
            BasisKind::Spatial => "spatial",
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= DUPLICATE_TOL * a.abs().max(b.abs()).max(1.0)
}

#[derive(Default)]
struct Header {
    kind: Option<BasisKind>,
    nbasis: Option<usize>,
    nelec: Option<usize>,
    eshift: Option<f64>,
    label: Option<String>,
}

struct Entry {
    line: usize,
    indices: Vec<usize>,
    value: f64,
}

fn set_once<T>(slot: &mut Option<T>, value: T, line: usize, name: &str) -> Result<()> {
    if slot.is_some() {
        return Err(parse_err(line, format!("duplicate `{name}` directive")));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_number<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

fn parse_value(tok: Option<&str>, line: usize) -> Result<f64> {
    let v: f64 = parse_number(tok, line, "value")?;
    if !v.is_finite() {
        return Err(parse_err(line, "non-finite value"));
    }
    Ok(v)
}

/// Parses an AOINTS v1 stream into a validated system.
pub fn parse_aoints(text: &str) -> Result<ParsedSystem> {
    let mut header = Header::default();
    let mut s_entries = Vec::new();
    let mut h_entries = Vec::new();
    let mut g_entries = Vec::new();
    let mut seen_magic = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if !seen_magic {
            if content != MAGIC {
                return Err(parse_err(line, format!("expected `{MAGIC}` header")));
            }
            seen_magic = true;
            continue;
        }
        let mut toks = content.split_whitespace();
        let directive = toks.next().unwrap_or_default();
        match directive {
            "kind" => {
                let kind = match toks.next() {
                    Some("spinorbital") => BasisKind::SpinOrbital,
                    Some("spatial") => BasisKind::Spatial,
                    other => {
                        return Err(parse_err(
                            line,
                            format!("unknown kind `{}`", other.unwrap_or("")),
                        ))
                    }
                };
                set_once(&mut header.kind, kind, line, "kind")?;
            }
            "nbasis" => {
                let n: usize = parse_number(toks.next(), line, "nbasis")?;
                if n == 0 {
                    return Err(parse_err(line, "nbasis must be positive"));
                }
                set_once(&mut header.nbasis, n, line, "nbasis")?;
            }
            "nelec" => {
                let n = parse_number(toks.next(), line, "nelec")?;
                set_once(&mut header.nelec, n, line, "nelec")?;
            }
            "eshift" => {
                let v = parse_value(toks.next(), line)?;
                set_once(&mut header.eshift, v, line, "eshift")?;
            }
            "label" => {
                let text = content["label".len()..].trim().to_string();
                set_once(&mut header.label, text, line, "label")?;
                continue;
            }
            "S" | "H" | "G" => {
                let n_idx = if directive == "G" { 4 } else { 2 };
                let mut indices = Vec::with_capacity(n_idx);
                for _ in 0..n_idx {
                    indices.push(parse_number::<usize>(toks.next(), line, "index")?);
                }
                let value = parse_value(toks.next(), line)?;
                let entry = Entry {
                    line,
                    indices,
                    value,
                };
                match directive {
                    "S" => s_entries.push(entry),
                    "H" => h_entries.push(entry),
                    _ => g_entries.push(entry),
                }
            }
            other => return Err(parse_err(line, format!("unknown directive `{other}`"))),
        }
        if let Some(extra) = toks.next() {
            return Err(parse_err(line, format!("unexpected token `{extra}`")));
        }
    }

    if !seen_magic {
        return Err(parse_err(1, format!("expected `{MAGIC}` header")));
    }
    let kind = header
        .kind
        .ok_or_else(|| parse_err(0, "missing `kind` directive"))?;
    let m = header
        .nbasis
        .ok_or_else(|| parse_err(0, "missing `nbasis` directive"))?;
    let nelec = header
        .nelec
        .ok_or_else(|| parse_err(0, "missing `nelec` directive"))?;

    let check_range = |e: &Entry| -> Result<Vec<usize>> {
        e.indices
            .iter()
            .map(|&i| {
                if i == 0 || i > m {
                    Err(parse_err(e.line, format!("index {i} out of range 1..={m}")))
                } else {
                    Ok(i - 1)
                }
            })
            .collect()
    };

    let fill_matrix = |entries: &[Entry], name: &str| -> Result<(Matrix, Vec<bool>)> {
        let mut seen: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut diag = vec![false; m];
        let mut mat = Matrix::zeros(m, m);
        for e in entries {
            let ix = check_range(e)?;
            let key = (ix[0].min(ix[1]), ix[0].max(ix[1]));
            if let Some(&prev) = seen.get(&key) {
                if !agree(prev, e.value) {
                    return Err(parse_err(
                        e.line,
                        format!(
                            "{name} {} {} = {} disagrees with equivalent entry {prev}",
                            ix[0] + 1,
                            ix[1] + 1,
                            e.value
                        ),
                    ));
                }
                continue;
            }
            seen.insert(key, e.value);
            if key.0 == key.1 {
                diag[key.0] = true;
            }
            mat[(key.0, key.1)] = e.value;
            mat[(key.1, key.0)] = e.value;
        }
        Ok((mat, diag))
    };

    let (metric, s_diag) = fill_matrix(&s_entries, "S")?;
    if let Some(i) = s_diag.iter().position(|&d| !d) {
        return Err(parse_err(
            0,
            format!("missing diagonal entry S {0} {0}", i + 1),
        ));
    }
    let (core_h, _) = fill_matrix(&h_entries, "H")?;

    let mut g = TwoElectronTensor::zeros(m);
    let mut g_seen: BTreeMap<[usize; 4], f64> = BTreeMap::new();
    for e in &g_entries {
        let ix = check_range(e)?;
        let key = canonical([ix[0], ix[1], ix[2], ix[3]]);
        if let Some(&prev) = g_seen.get(&key) {
            if !agree(prev, e.value) {
                return Err(parse_err(
                    e.line,
                    format!(
                        "G {} {} {} {} = {} disagrees with equivalent entry {prev}",
                        ix[0] + 1,
                        ix[1] + 1,
                        ix[2] + 1,
                        ix[3] + 1,
                        e.value
                    ),
                ));
            }
            continue;
        }
        g_seen.insert(key, e.value);
        g.set(ix[0], ix[1], ix[2], ix[3], e.value);
    }

    let eshift = header.eshift.unwrap_or(0.0);
    let label = header.label.unwrap_or_default();
    Ok(match kind {
        BasisKind::SpinOrbital => {
            ParsedSystem::SpinOrbital(AoSystem::new(metric, core_h, g, nelec, eshift, label)?)
        }
        BasisKind::Spatial => {
            ParsedSystem::Spatial(SpatialSystem::new(metric, core_h, g, nelec, eshift, label)?)
        }
    })
}

fn canonical([i, j, k, l]: [usize; 4]) -> [usize; 4] {
    let a = (i.min(j), i.max(j));
    let b = (k.min(l), k.max(l));
    let (p, q) = if a <= b { (a, b) } else { (b, a) };
    [p.0, p.1, q.0, q.1]
}

/// 17 significant digits; parses back to the identical `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[allow(clippy::too_many_arguments)]
fn write_parts(
    kind: BasisKind,
    metric: &Matrix,
    core_h: &Matrix,
    g: &TwoElectronTensor,
    n_electrons: usize,
    energy_shift: f64,
    label: &str,
) -> String {
    let m = metric.nrows();
    let mut out = String::new();
    // Writing to a String cannot fail.
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "kind {}", kind.as_str());
    let _ = writeln!(out, "nbasis {m}");
    let _ = writeln!(out, "nelec {n_electrons}");
    let _ = writeln!(out, "eshift {}", format_real(energy_shift));
    let label = label.replace(['\n', '\r', '#'], " ");
    let label = label.trim();
    if !label.is_empty() {
        let _ = writeln!(out, "label {label}");
    }
    for (tag, mat) in [("S", metric), ("H", core_h)] {
        for i in 0..m {
            for j in i..m {
                let _ = writeln!(
                    out,
                    "{tag} {} {} {}",
                    i + 1,
                    j + 1,
                    format_real(mat[(i, j)])
                );
            }
        }
    }
    for [i, j, k, l] in g.canonical_quadruples() {
        let _ = writeln!(
            out,
            "G {} {} {} {} {}",
            i + 1,
            j + 1,
            k + 1,
            l + 1,
            format_real(g.get(i, j, k, l))
        );
    }
    out
}

/// Canonical AOINTS text: one line per symmetry-unique entry, sorted indices.
pub fn write_aoints(system: &ParsedSystem) -> String {
    match system {
        ParsedSystem::SpinOrbital(s) => write_spin(s),
        ParsedSystem::Spatial(s) => write_spatial(s),
    }
}

pub fn write_spin(s: &AoSystem) -> String {
    write_parts(
        BasisKind::SpinOrbital,
        &s.metric,
        &s.core_h,
        &s.two_electron,
        s.n_electrons,
        s.energy_shift,
        &s.label,
    )
}

pub fn write_spatial(s: &SpatialSystem) -> String {
    write_parts(
        BasisKind::Spatial,
        &s.metric,
        &s.core_h,
        &s.two_electron,
        s.n_electrons,
        s.energy_shift,
        &s.label,
    )
}
