//! Derivative-free local search used to polish sampled optima.

use std::cell::Cell;

/// Result of a Nelder–Mead run.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Spread of function values over the final simplex.
    pub spread: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub initial_step: f64,
    pub max_evals: usize,
    pub f_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            initial_step: 0.1,
            max_evals: 4000,
            f_tol: 1e-12,
        }
    }
}

impl NelderMead {
    /// Minimizes `f` starting from `x0` with the standard coefficients
    /// (reflection 1, expansion 2, contraction ½, shrink ½).
    pub fn minimize(&self, f: impl Fn(&[f64]) -> f64, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let evals = Cell::new(0usize);
        let eval = |x: &[f64]| {
            evals.set(evals.get() + 1);
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), eval(x0)));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += if x[i].abs() > 1e-8 {
                self.initial_step * x[i].abs().max(0.25)
            } else {
                self.initial_step
            };
            let v = eval(&x);
            simplex.push((x, v));
        }
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            if spread.abs() <= self.f_tol * (1.0 + simplex[0].1.abs()) || evals.get() >= self.max_evals {
                let (x, value) = simplex.swap_remove(0);
                return Minimum {
                    x,
                    value,
                    evaluations: evals.get(),
                    spread,
                };
            }
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / n as f64;
                }
            }
            let worst = simplex[n].clone();
            let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };
            let xr = along(1.0);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = along(2.0);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < worst.1 {
                    let x = along(0.5);
                    let v = eval(&x);
                    (x, v)
                } else {
                    let x = along(-0.5);
                    let v = eval(&x);
                    (x, v)
                };
                if fc < worst.1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for item in simplex.iter_mut().skip(1) {
                        let x: Vec<f64> = best.iter().zip(&item.0).map(|(b, xi)| b + 0.5 * (xi - b)).collect();
                        let v = eval(&x);
                        *item = (x, v);
                    }
                }
            }
        }
    }
}
