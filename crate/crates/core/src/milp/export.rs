//! LP-style text export of a model, with provenance tags as comments.
//!
//! The format round-trips through [`parse_lp`]:
//!
//! ```text
//! MINIMIZE
//!  1 T
//! SUBJECT TO
//! \ time.A_s0.B
//!  1 t.A_s0 -1 t.B 26 e.A_s0.B <= 24
//! BOUNDS
//!  0 <= t.A_s0 <= 20 \ t_time
//! END
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::milp::{MilpModel, VarRole};

pub fn write_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str("MINIMIZE\n ");
    if model.objective.is_empty() {
        out.push('0');
    }
    for (&v, &c) in &model.objective {
        write!(out, "{c} {} ", model.variables[v].name).unwrap();
    }
    out.push_str("\nSUBJECT TO\n");
    for cons in &model.constraints {
        writeln!(out, "\\ {}", cons.tag).unwrap();
        out.push(' ');
        for (&v, &c) in &cons.coefficients {
            write!(out, "{c} {} ", model.variables[v].name).unwrap();
        }
        match (cons.lower, cons.upper) {
            (Some(l), Some(u)) if l == u => write!(out, "= {l}").unwrap(),
            (Some(l), Some(u)) => write!(out, "IN {l} {u}").unwrap(),
            (Some(l), None) => write!(out, ">= {l}").unwrap(),
            (None, Some(u)) => write!(out, "<= {u}").unwrap(),
            (None, None) => unreachable!("constraints always have a finite bound"),
        }
        out.push('\n');
    }
    out.push_str("BOUNDS\n");
    for v in &model.variables {
        writeln!(out, " {} <= {} <= {} \\ {:?}", v.lower, v.name, v.upper, v.role).unwrap();
    }
    out.push_str("END\n");
    out
}

pub fn parse_lp(text: &str) -> Result<MilpModel> {
    #[derive(PartialEq)]
    enum Section {
        Preamble,
        Objective,
        Constraints,
        Bounds,
        Done,
    }
    let mut section = Section::Preamble;
    let mut model = MilpModel::new();
    // names seen before BOUNDS, resolved afterwards
    let mut objective_terms: Vec<(i64, String)> = Vec::new();
    let mut constraints: Vec<(Vec<(i64, String)>, Option<i64>, Option<i64>, String)> = Vec::new();
    let mut pending_tag = String::new();

    let parse_terms = |tokens: &[&str]| -> Result<Vec<(i64, String)>> {
        let mut terms = Vec::new();
        for pair in tokens.chunks(2) {
            let [c, name] = pair else {
                return Err(Error::Parse("dangling coefficient".into()));
            };
            let c: i64 = c.parse().map_err(|_| Error::Parse(format!("bad coefficient {c}")))?;
            terms.push((c, name.to_string()));
        }
        Ok(terms)
    };

    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('\\') {
            if section == Section::Constraints {
                pending_tag = comment.trim().to_string();
            }
            continue;
        }
        match line {
            "MINIMIZE" => {
                section = Section::Objective;
                continue;
            }
            "SUBJECT TO" => {
                section = Section::Constraints;
                continue;
            }
            "BOUNDS" => {
                section = Section::Bounds;
                continue;
            }
            "END" => {
                section = Section::Done;
                continue;
            }
            _ => {}
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::Objective => {
                if tokens == ["0"] {
                    continue;
                }
                objective_terms.extend(parse_terms(&tokens)?);
            }
            Section::Constraints => {
                let op_pos = tokens
                    .iter()
                    .position(|t| matches!(*t, "<=" | ">=" | "=" | "IN"))
                    .ok_or_else(|| Error::Parse(format!("no relation in: {line}")))?;
                let terms = parse_terms(&tokens[..op_pos])?;
                let num = |s: &str| -> Result<i64> {
                    s.parse().map_err(|_| Error::Parse(format!("bad bound {s}")))
                };
                let (lower, upper) = match tokens[op_pos] {
                    "<=" => (None, Some(num(tokens[op_pos + 1])?)),
                    ">=" => (Some(num(tokens[op_pos + 1])?), None),
                    "=" => {
                        let v = num(tokens[op_pos + 1])?;
                        (Some(v), Some(v))
                    }
                    "IN" => (Some(num(tokens[op_pos + 1])?), Some(num(tokens[op_pos + 2])?)),
                    _ => unreachable!(),
                };
                constraints.push((terms, lower, upper, std::mem::take(&mut pending_tag)));
            }
            Section::Bounds => {
                // " l <= name <= u \ Role"
                if tokens.len() < 5 || tokens[1] != "<=" || tokens[3] != "<=" {
                    return Err(Error::Parse(format!("bad bounds line: {line}")));
                }
                let lower: i64 = tokens[0]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad bound {}", tokens[0])))?;
                let upper: i64 = tokens[4]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad bound {}", tokens[4])))?;
                let name = tokens[2];
                let role = name
                    .split('.')
                    .next()
                    .and_then(VarRole::from_prefix)
                    .unwrap_or(VarRole::Slack);
                model.add_var(name, lower, upper, role)?;
            }
            Section::Preamble | Section::Done => {
                return Err(Error::Parse(format!("unexpected line: {line}")));
            }
        }
    }

    let resolve = |model: &MilpModel, terms: &[(i64, String)]| -> Result<BTreeMap<usize, i64>> {
        let mut out = BTreeMap::new();
        for (c, name) in terms {
            let idx = model
                .var(name)
                .ok_or_else(|| Error::Parse(format!("unknown variable {name}")))?;
            *out.entry(idx).or_insert(0) += c;
        }
        Ok(out)
    };
    model.objective = resolve(&model, &objective_terms)?;
    for (terms, lower, upper, tag) in constraints {
        let coeffs = resolve(&model, &terms)?;
        model.add_constraint(coeffs, lower, upper, tag)?;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{build_milp, rewrite_bases, FormulationOptions};
    use crate::samples;

    #[test]
    fn toy_model_round_trips_through_lp_text() {
        let rw = rewrite_bases(&samples::toy_mission(), 1).unwrap();
        let model = build_milp(&rw, &FormulationOptions::default()).unwrap();
        let text = write_lp(&model);
        let back = parse_lp(&text).unwrap();
        assert_eq!(model.variables, back.variables);
        assert_eq!(model.objective, back.objective);
        assert_eq!(model.constraints, back.constraints);
    }
}
