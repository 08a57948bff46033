//! QUBO file format: header `n offset`, then one `i j value` line per
//! nonzero upper-triangle entry (off-diagonal values carry both symmetric
//! halves), plus a JSON sidecar with the decode map.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{BitGroup, PenaltyTerm, Qubo};

#[derive(Serialize, Deserialize)]
struct Sidecar {
    groups: Vec<BitGroup>,
    penalties: Vec<PenaltyTerm>,
}

/// Writes `path` and `path.decode.json`.
pub fn write_qubo(qubo: &Qubo, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("{} {}\n", qubo.n, qubo.offset);
    for i in 0..qubo.n {
        for j in i..qubo.n {
            let v = if i == j {
                qubo.entry(i, i)
            } else {
                qubo.entry(i, j) + qubo.entry(j, i)
            };
            if v != 0.0 {
                out.push_str(&format!("{i} {j} {v}\n"));
            }
        }
    }
    std::fs::write(path, out)?;
    let sidecar = Sidecar {
        groups: qubo.groups.clone(),
        penalties: qubo.penalties.clone(),
    };
    std::fs::write(
        sidecar_path(path),
        serde_json::to_string_pretty(&sidecar)?,
    )?;
    Ok(())
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".decode.json");
    s.into()
}

pub fn read_qubo(path: impl AsRef<Path>) -> Result<Qubo> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty qubo file".into()))?;
    let mut parts = header.split_whitespace();
    let n: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse("bad qubo header".into()))?;
    let offset: f64 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse("bad qubo header".into()))?;
    let mut qubo = Qubo::zero(n);
    qubo.offset = offset;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (i, j, v): (usize, usize, f64) = (|| {
            Some((
                parts.next()?.parse().ok()?,
                parts.next()?.parse().ok()?,
                parts.next()?.parse().ok()?,
            ))
        })()
        .ok_or_else(|| Error::Parse(format!("bad qubo line: {line}")))?;
        if i >= n || j >= n || i > j {
            return Err(Error::Parse(format!("bad qubo indices: {line}")));
        }
        if i == j {
            qubo.q[i * n + i] = v;
        } else {
            qubo.q[i * n + j] = v / 2.0;
            qubo.q[j * n + i] = v / 2.0;
        }
    }
    if let Ok(text) = std::fs::read_to_string(sidecar_path(path)) {
        let sidecar: Sidecar = serde_json::from_str(&text)?;
        qubo.groups = sidecar.groups;
        qubo.penalties = sidecar.penalties;
    }
    Ok(qubo)
}
