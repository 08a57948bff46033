//! Linearization gadgets: product of binaries, switched implications and
//! min-max, plus big-M sizing by interval arithmetic.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::milp::{MilpModel, VarRole};

/// Smallest M such that `c^T x - d <= M` holds over the whole variable box.
/// Such an M makes `c^T x - (1-b)M <= d` vacuous when `b = 0`.
pub fn compute_big_m(model: &MilpModel, coefficients: &BTreeMap<usize, i64>, d: i64) -> Result<i64> {
    let (_, hi) = model.expr_range(coefficients);
    Ok((hi - d).max(0))
}

/// Adds binary `z` constrained to equal `x * y` via the three inequalities
/// `1 + z >= x + y`, `z <= x`, `z <= y`.
pub fn gadget_product(model: &mut MilpModel, x: usize, y: usize, name: &str, tag: &str) -> Result<usize> {
    for v in [x, y] {
        let spec = model
            .variables
            .get(v)
            .ok_or_else(|| Error::Build(format!("product gadget: unknown variable {v}")))?;
        if spec.lower < 0 || spec.upper > 1 {
            return Err(Error::Build(format!(
                "product gadget input {} is not binary",
                spec.name
            )));
        }
    }
    let z = model.add_var(name, 0, 1, VarRole::YProduct)?;
    model.add_constraint(
        BTreeMap::from([(x, 1), (y, 1), (z, -1)]),
        None,
        Some(1),
        format!("{tag}.sum"),
    )?;
    model.add_constraint(
        BTreeMap::from([(z, 1), (x, -1)]),
        None,
        Some(0),
        format!("{tag}.le_x"),
    )?;
    model.add_constraint(
        BTreeMap::from([(z, 1), (y, -1)]),
        None,
        Some(0),
        format!("{tag}.le_y"),
    )?;
    Ok(z)
}

/// Adds `c^T x - (1-b)M <= d`: inactive when `b = 0`, enforces `c^T x <= d`
/// when `b = 1`. Errors if M is too small to switch the constraint off.
pub fn gadget_implication(
    model: &mut MilpModel,
    condition: usize,
    coefficients: &BTreeMap<usize, i64>,
    d: i64,
    big_m: i64,
    tag: &str,
) -> Result<usize> {
    let needed = compute_big_m(model, coefficients, d)?;
    if big_m < needed {
        return Err(Error::Build(format!(
            "big-M {big_m} too small for {tag}: need at least {needed}"
        )));
    }
    let mut coeffs = coefficients.clone();
    *coeffs.entry(condition).or_insert(0) += big_m;
    model.add_constraint(coeffs, None, Some(d + big_m), tag)
}

/// Adds variable `X` with `X_i <= X` for every input, so minimizing `X`
/// yields `max_i X_i`.
pub fn gadget_min_max(model: &mut MilpModel, values: &[usize], name: &str, tag: &str) -> Result<usize> {
    if values.is_empty() {
        return Err(Error::Build("min-max gadget needs at least one input".into()));
    }
    let lower = values.iter().map(|&v| model.variables[v].lower).max().unwrap();
    let upper = values.iter().map(|&v| model.variables[v].upper).max().unwrap();
    let x = model.add_var(name, lower, upper, VarRole::TMakespan)?;
    for &v in values {
        let vname = model.variables[v].name.clone();
        model.add_constraint(
            BTreeMap::from([(v, 1), (x, -1)]),
            None,
            Some(0),
            format!("{tag}.{vname}"),
        )?;
    }
    Ok(x)
}
