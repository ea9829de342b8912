//! Derivative-free simplex minimization.
//!
//! The iteration follows the textbook (non-adaptive) Nelder–Mead scheme with
//! the same initial simplex and stopping rule as scipy's `method='Nelder-Mead'`,
//! so that tolerances such as `xatol = fatol = 1e-2` mean the same thing here:
//!
//! * vertex `i + 1` perturbs coordinate `i` of `x0` by 5%, or sets it to
//!   `0.00025` when it is zero ([`InitialSimplex::Relative`]);
//! * stop once `max |x_i − x_best| ≤ xatol` over all vertices and coordinates
//!   **and** `max |f_i − f_best| ≤ fatol`;
//! * at most `200·N` iterations and `200·N` loss evaluations by default.
//!
//! The relative simplex is tiny around small starting points: from
//! `x0 ∈ [−0.1, 0.1]^N` every edge is shorter than `xatol = 1e-2` and the
//! search stops before its first step. [`InitialSimplex::Absolute`] offers a
//! fixed edge length for such starts.
//!
//! Nelder–Mead is deterministic, so no seed is taken; randomness enters only
//! through the starting point and the loss itself.

use serde::{Deserialize, Serialize};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
const NONZERO_DELTA: f64 = 0.05;
const ZERO_DELTA: f64 = 0.00025;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub enum InitialSimplex {
    /// scipy's rule: scale nonzero coordinates by 1.05, set zeros to 0.00025.
    #[default]
    Relative,
    /// Add a fixed step to each coordinate in turn.
    Absolute(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    pub xatol: f64,
    pub fatol: f64,
    pub initial_simplex: InitialSimplex,
    /// Iteration cap; `None` means `200·N`.
    pub max_iter: Option<usize>,
    /// Evaluation cap; `None` means `200·N`.
    pub max_evaluations: Option<usize>,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            xatol: 1e-2,
            fatol: 1e-2,
            initial_simplex: InitialSimplex::Relative,
            max_iter: None,
            max_evaluations: None,
        }
    }
}

impl NelderMeadOptions {
    pub fn with_tolerances(xatol: f64, fatol: f64) -> Self {
        Self {
            xatol,
            fatol,
            ..Self::default()
        }
    }

    pub fn with_initial_simplex(mut self, initial_simplex: InitialSimplex) -> Self {
        self.initial_simplex = initial_simplex;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fun: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// `false` when a cap stopped the search before the tolerances were met.
    pub converged: bool,
}

/// Minimizes `loss` starting from `x0`. Errors from the loss abort the search
/// and are returned unchanged. NaN losses are treated as `+∞`.
pub fn nelder_mead<E>(
    mut loss: impl FnMut(&[f64]) -> Result<f64, E>,
    x0: &[f64],
    options: &NelderMeadOptions,
) -> Result<NelderMeadResult, E> {
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evaluations: &mut usize| -> Result<f64, E> {
        *evaluations += 1;
        let f = loss(x)?;
        Ok(if f.is_nan() { f64::INFINITY } else { f })
    };

    if n == 0 {
        let fun = eval(x0, &mut evaluations)?;
        return Ok(NelderMeadResult {
            x: Vec::new(),
            fun,
            iterations: 0,
            evaluations,
            converged: true,
        });
    }

    let max_iter = options.max_iter.unwrap_or(200 * n);
    let max_evaluations = options.max_evaluations.unwrap_or(200 * n);

    let mut sim: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    sim.push(x0.to_vec());
    for k in 0..n {
        let mut y = x0.to_vec();
        y[k] = match options.initial_simplex {
            InitialSimplex::Relative if y[k] != 0.0 => (1.0 + NONZERO_DELTA) * y[k],
            InitialSimplex::Relative => ZERO_DELTA,
            InitialSimplex::Absolute(step) => y[k] + step,
        };
        sim.push(y);
    }
    let mut fsim = Vec::with_capacity(n + 1);
    for v in &sim {
        fsim.push(eval(v, &mut evaluations)?);
    }
    sort_simplex(&mut sim, &mut fsim);

    let mut iterations = 1usize;
    let mut converged = false;
    while evaluations < max_evaluations && iterations < max_iter {
        if spread_within(&sim, &fsim, options) {
            converged = true;
            break;
        }

        let xbar: Vec<f64> = (0..n)
            .map(|j| sim[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = sim[n].clone();
        // Points on the line through the centroid and the worst vertex:
        // t = 1 reflects, t = 2 expands, t = 0.5 contracts outside and
        // t = −0.5 contracts inside.
        let along = |t: f64| -> Vec<f64> {
            xbar.iter()
                .zip(&worst)
                .map(|(b, w)| (1.0 + t) * b - t * w)
                .collect()
        };

        let xr = along(REFLECT);
        let fxr = eval(&xr, &mut evaluations)?;
        let mut shrink = false;
        if fxr < fsim[0] {
            let xe = along(REFLECT * EXPAND);
            let fxe = eval(&xe, &mut evaluations)?;
            if fxe < fxr {
                sim[n] = xe;
                fsim[n] = fxe;
            } else {
                sim[n] = xr;
                fsim[n] = fxr;
            }
        } else if fxr < fsim[n - 1] {
            sim[n] = xr;
            fsim[n] = fxr;
        } else if fxr < fsim[n] {
            let xc = along(CONTRACT * REFLECT);
            let fxc = eval(&xc, &mut evaluations)?;
            if fxc <= fxr {
                sim[n] = xc;
                fsim[n] = fxc;
            } else {
                shrink = true;
            }
        } else {
            let xcc = along(-CONTRACT);
            let fxcc = eval(&xcc, &mut evaluations)?;
            if fxcc < fsim[n] {
                sim[n] = xcc;
                fsim[n] = fxcc;
            } else {
                shrink = true;
            }
        }
        if shrink {
            let best = sim[0].clone();
            for j in 1..=n {
                for (x, b) in sim[j].iter_mut().zip(&best) {
                    *x = b + SHRINK * (*x - b);
                }
                fsim[j] = eval(&sim[j], &mut evaluations)?;
            }
        }
        iterations += 1;
        sort_simplex(&mut sim, &mut fsim);
    }

    Ok(NelderMeadResult {
        x: sim.swap_remove(0),
        fun: fsim[0],
        iterations,
        evaluations,
        converged,
    })
}

/// Stable sort of the vertices by loss, best first.
fn sort_simplex(sim: &mut Vec<Vec<f64>>, fsim: &mut Vec<f64>) {
    let mut order: Vec<usize> = (0..fsim.len()).collect();
    order.sort_by(|&a, &b| fsim[a].total_cmp(&fsim[b]));
    *sim = order.iter().map(|&i| sim[i].clone()).collect();
    *fsim = order.iter().map(|&i| fsim[i]).collect();
}

fn spread_within(sim: &[Vec<f64>], fsim: &[f64], options: &NelderMeadOptions) -> bool {
    let x_spread = sim[1..]
        .iter()
        .flat_map(|v| v.iter().zip(&sim[0]).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    let f_spread = fsim[1..].iter().map(|f| (f - fsim[0]).abs()).fold(0.0, f64::max);
    // Infinite spreads (NaN-mapped vertices) never satisfy the tolerance.
    x_spread <= options.xatol && f_spread <= options.fatol && f_spread.is_finite()
}
