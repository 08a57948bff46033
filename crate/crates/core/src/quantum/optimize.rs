//! Derivative-free minimization for the low-dimensional, periodic VQE
//! landscape: Nelder-Mead simplex by default, finite-difference gradient
//! descent as an option.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    NelderMead,
    GradientDescent,
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizeConfig {
    pub max_evals: usize,
    pub kind: OptimizerKind,
}

/// Minimizes `f` from `start`; returns the best point and value found
/// within the evaluation budget.
pub fn minimize(
    f: &mut dyn FnMut(&[f64]) -> f64,
    start: &[f64],
    cfg: &OptimizeConfig,
) -> (Vec<f64>, f64) {
    match cfg.kind {
        OptimizerKind::NelderMead => nelder_mead_impl(f, start, cfg.max_evals),
        OptimizerKind::GradientDescent => gradient_descent(f, start, cfg.max_evals),
    }
}

fn nelder_mead_impl(
    f: &mut dyn FnMut(&[f64]) -> f64,
    start: &[f64],
    max_evals: usize,
) -> (Vec<f64>, f64) {
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink
    const STEP: f64 = 0.4;
    let dim = start.len();
    let mut evals = 0usize;
    let eval = |f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        f(x)
    };
    if dim == 0 {
        return (vec![], eval(f, start, &mut evals));
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v = eval(f, start, &mut evals);
    simplex.push((start.to_vec(), v));
    for i in 0..dim {
        let mut x = start.to_vec();
        x[i] += STEP;
        let v = eval(f, &x, &mut evals);
        simplex.push((x, v));
    }
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[dim].1 - simplex[0].1).abs() < 1e-12 {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let mix = |t: f64| -> Vec<f64> {
            (0..dim)
                .map(|k| centroid[k] + t * (centroid[k] - worst.0[k]))
                .collect()
        };
        let xr = mix(ALPHA);
        let fr = eval(f, &xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = mix(GAMMA);
            let fe = eval(f, &xe, &mut evals);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let xc = mix(-RHO);
            let fc = eval(f, &xc, &mut evals);
            if fc < worst.1 {
                simplex[dim] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = entry
                        .0
                        .iter()
                        .zip(&best)
                        .map(|(xi, bi)| bi + SIGMA * (xi - bi))
                        .collect();
                    let v = eval(f, &x, &mut evals);
                    *entry = (x, v);
                    if evals >= max_evals {
                        break;
                    }
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

fn gradient_descent(
    f: &mut dyn FnMut(&[f64]) -> f64,
    start: &[f64],
    max_evals: usize,
) -> (Vec<f64>, f64) {
    const H: f64 = 1e-4;
    let mut lr = 0.2;
    let mut x = start.to_vec();
    let mut fx = f(&x);
    let mut evals = 1usize;
    while evals + 2 * x.len() + 1 <= max_evals {
        let mut grad = vec![0.0; x.len()];
        for i in 0..x.len() {
            let mut hi = x.clone();
            hi[i] += H;
            let mut lo = x.clone();
            lo[i] -= H;
            grad[i] = (f(&hi) - f(&lo)) / (2.0 * H);
            evals += 2;
        }
        let candidate: Vec<f64> = x.iter().zip(&grad).map(|(xi, g)| xi - lr * g).collect();
        let fc = f(&candidate);
        evals += 1;
        if fc < fx {
            x = candidate;
            fx = fc;
        } else {
            lr *= 0.5;
            if lr < 1e-6 {
                break;
            }
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_finds_quadratic_minimum() {
        let mut f = |x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2);
        let cfg = OptimizeConfig {
            max_evals: 500,
            kind: OptimizerKind::NelderMead,
        };
        let (x, v) = minimize(&mut f, &[0.0, 0.0], &cfg);
        assert!(v < 1e-8, "value {v}");
        assert!((x[0] - 1.0).abs() < 1e-3 && (x[1] + 2.0).abs() < 1e-3);
    }

    #[test]
    fn gradient_descent_finds_cosine_minimum() {
        let mut f = |x: &[f64]| 2.0 + x[0].cos();
        let cfg = OptimizeConfig {
            max_evals: 1000,
            kind: OptimizerKind::GradientDescent,
        };
        let (x, v) = minimize(&mut f, &[2.0], &cfg);
        assert!((v - 1.0).abs() < 1e-6);
        assert!((x[0] - std::f64::consts::PI).abs() < 1e-3);
    }
}
