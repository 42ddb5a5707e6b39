//! Unconstrained minimizers: Nelder-Mead simplex search and a BFGS variant
//! driven by central-difference gradients.
//!
//! Objectives may return `f64::INFINITY` (or NaN) to reject a point.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Edge length of the initial simplex along each axis.
    pub initial_step: f64,
    /// Stop once the simplex diameter falls below `rel_tol * (1 + |x_best|)`.
    pub rel_tol: f64,
    /// Number of restarts from the best vertex after convergence.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            initial_step: 0.25,
            rel_tol: 1e-8,
            restarts: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Best objective value after each iteration; never increases.
    pub trace: Vec<f64>,
}

fn clean(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(a.iter().map(|x| x * x).sum())
}

/// Nelder-Mead with the standard coefficients (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2).
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> Minimum {
    let dim = x0.len();
    let mut best = (x0.to_vec(), clean(f(x0)));
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    if dim == 0 {
        return Minimum {
            x: best.0,
            value: best.1,
            converged: true,
            iterations: 0,
            trace,
        };
    }
    for _ in 0..=opts.restarts {
        let run = simplex_run(
            &mut f,
            &best.0,
            opts,
            opts.max_iter.saturating_sub(iterations),
            &mut trace,
        );
        iterations += run.iterations;
        if run.value <= best.1 {
            best = (run.x, run.value);
        }
        converged = run.converged;
        if !converged {
            break;
        }
    }
    Minimum {
        x: best.0,
        value: best.1,
        converged,
        iterations,
        trace,
    }
}

fn simplex_run<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    start: &[f64],
    opts: &NelderMeadOptions,
    budget: usize,
    trace: &mut Vec<f64>,
) -> Minimum {
    let dim = start.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    pts.push(start.to_vec());
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += opts.initial_step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| clean(f(p))).collect();
    let mut iterations = 0;
    let mut converged = false;
    let mut centroid = vec![0.0; dim];
    let at = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(w).map(|(a, b)| a + t * (b - a)).collect()
    };
    while iterations < budget {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let diameter = pts[1..]
            .iter()
            .map(|p| dist(p, &pts[0]))
            .fold(0.0, f64::max);
        if diameter < opts.rel_tol * (1.0 + norm(&pts[0])) {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for p in &pts[..dim] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / dim as f64;
            }
        }
        let worst = pts[dim].clone();
        let reflected = at(&centroid, &worst, -1.0);
        let fr = clean(f(&reflected));
        if fr < vals[0] {
            let expanded = at(&centroid, &worst, -2.0);
            let fe = clean(f(&expanded));
            if fe < fr {
                pts[dim] = expanded;
                vals[dim] = fe;
            } else {
                pts[dim] = reflected;
                vals[dim] = fr;
            }
        } else if fr < vals[dim - 1] {
            pts[dim] = reflected;
            vals[dim] = fr;
        } else {
            let (cand, fc) = if fr < vals[dim] {
                let c = at(&centroid, &worst, -0.5);
                let v = clean(f(&c));
                (c, v)
            } else {
                let c = at(&centroid, &worst, 0.5);
                let v = clean(f(&c));
                (c, v)
            };
            if fc < vals[dim].min(fr) {
                pts[dim] = cand;
                vals[dim] = fc;
            } else {
                for i in 1..=dim {
                    pts[i] = at(&pts[0], &pts[i], 0.5);
                    vals[i] = clean(f(&pts[i]));
                }
            }
        }
        let current = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let prev = trace.last().copied().unwrap_or(f64::INFINITY);
        trace.push(current.min(prev));
    }
    let (mut bi, mut bv) = (0, vals[0]);
    for (i, &v) in vals.iter().enumerate() {
        if v < bv {
            bi = i;
            bv = v;
        }
    }
    if !converged {
        log::warn!("simplex search stopped after {iterations} iterations without converging");
    }
    Minimum {
        x: pts[bi].clone(),
        value: bv,
        converged,
        iterations,
        trace: Vec::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop when the gradient norm is below `grad_tol * (1 + |f|)`.
    pub grad_tol: f64,
    /// Relative step of the central-difference gradient.
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-8,
            fd_step: 1e-6,
        }
    }
}

pub fn central_gradient<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], rel_step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let step = rel_step * (1.0 + x[i].abs());
            probe[i] = x[i] + step;
            let up = f(&probe);
            probe[i] = x[i] - step;
            let dn = f(&probe);
            probe[i] = x[i];
            (up - dn) / (2.0 * step)
        })
        .collect()
}

/// BFGS with an Armijo backtracking line search on finite-difference
/// gradients.
pub fn bfgs<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &BfgsOptions) -> Minimum {
    let dim = x0.len();
    let mut x = x0.to_vec();
    let mut fx = clean(f(&x));
    let mut g = central_gradient(&mut f, &x, opts.fd_step);
    let mut inv_h: Vec<f64> = (0..dim * dim)
        .map(|i| if i % (dim + 1) == 0 { 1.0 } else { 0.0 })
        .collect();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        if norm(&g) < opts.grad_tol * (1.0 + fx.abs()) {
            converged = true;
            break;
        }
        iterations += 1;
        let mut dir: Vec<f64> = (0..dim)
            .map(|i| -(0..dim).map(|j| inv_h[i * dim + j] * g[j]).sum::<f64>())
            .collect();
        let mut slope: f64 = dir.iter().zip(&g).map(|(d, gi)| d * gi).sum();
        if slope >= 0.0 {
            // lost positive definiteness; fall back to steepest descent
            inv_h
                .iter_mut()
                .enumerate()
                .for_each(|(i, v)| *v = if i % (dim + 1) == 0 { 1.0 } else { 0.0 });
            dir = g.iter().map(|v| -v).collect();
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            let ft = clean(f(&trial));
            if ft <= fx + 1e-4 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            break;
        };
        let gn = central_gradient(&mut f, &xn, opts.fd_step);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 * norm(&s) * norm(&y) {
            let hy: Vec<f64> = (0..dim)
                .map(|i| (0..dim).map(|j| inv_h[i * dim + j] * y[j]).sum())
                .collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            let rho = 1.0 / sy;
            for i in 0..dim {
                for j in 0..dim {
                    inv_h[i * dim + j] +=
                        rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        x = xn;
        fx = fnew;
        g = gn;
        trace.push(fx);
    }
    Minimum {
        x,
        value: fx,
        converged,
        iterations,
        trace,
    }
}
