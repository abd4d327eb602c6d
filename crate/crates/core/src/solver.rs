//! Sparse-recovery solvers over a ±1 design matrix.
//!
//! [`solve_lasso`] minimizes the unnormalized objective
//! `Σ_i (Σ_S α_S χ_S(x_i) − f(x_i))² + λ‖α‖₁` by cyclic coordinate descent.
//! Every design column has squared norm `T`, so each coordinate update is an
//! exact soft-threshold. [`solve_joint`] runs the full-batch subgradient loop
//! for several anchored models tied together by sparsity and consensus
//! penalties.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cube::{chi, BasisFamily, SignedPoint};
use crate::error::{Error, Result};
use crate::oracle::rng_from;

/// `T` evaluations of every basis function in `C`, plus targets `f(x_i)`.
#[derive(Clone, Debug)]
pub struct DesignProblem {
    basis: BasisFamily,
    rows: usize,
    // column-major: entry (i, j) at j * rows + i
    design: Vec<f64>,
    targets: Vec<f64>,
}

impl DesignProblem {
    pub fn new(basis: BasisFamily, points: &[SignedPoint], targets: Vec<f64>) -> Result<Self> {
        if points.len() != targets.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points but {} targets",
                points.len(),
                targets.len()
            )));
        }
        if let Some(t) = targets.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite target {t}")));
        }
        for x in points {
            Error::check_dim(basis.dim(), x.dim())?;
        }
        let rows = points.len();
        let mut design = Vec::with_capacity(rows * basis.len());
        for s in basis.iter() {
            design.extend(points.iter().map(|x| chi(s.mask(), x.mask())));
        }
        Ok(Self {
            basis,
            rows,
            design,
            targets,
        })
    }

    pub fn basis(&self) -> &BasisFamily {
        &self.basis
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.basis.len()
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.design[j * self.rows..(j + 1) * self.rows]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.design[j * self.rows + i]
    }

    /// The sub-problem on the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> DesignProblem {
        let mut design = Vec::with_capacity(rows.len() * self.cols());
        for j in 0..self.cols() {
            let col = self.column(j);
            design.extend(rows.iter().map(|&i| col[i]));
        }
        DesignProblem {
            basis: self.basis.clone(),
            rows: rows.len(),
            design,
            targets: rows.iter().map(|&i| self.targets[i]).collect(),
        }
    }

    /// `Xα − y`.
    pub fn residuals(&self, alpha: &[f64]) -> Vec<f64> {
        let mut r: Vec<f64> = self.targets.iter().map(|y| -y).collect();
        for (j, a) in alpha.iter().enumerate() {
            if *a != 0.0 {
                for (ri, x) in r.iter_mut().zip(self.column(j)) {
                    *ri += a * x;
                }
            }
        }
        r
    }

    /// The lasso objective at `alpha`.
    pub fn lasso_objective(&self, alpha: &[f64], cfg: &LassoConfig) -> f64 {
        let fit: f64 = self.residuals(alpha).iter().map(|r| r * r).sum();
        fit + cfg.lambda * self.penalized_l1(alpha, cfg)
    }

    fn penalized_l1(&self, alpha: &[f64], cfg: &LassoConfig) -> f64 {
        alpha
            .iter()
            .zip(self.basis.iter())
            .filter(|(_, s)| cfg.penalize_intercept || !s.is_empty())
            .map(|(a, _)| a.abs())
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LassoConfig {
    pub lambda: f64,
    /// Converged once a full sweep changes no coefficient by more than this.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// When false the constant term `α_∅` is left unpenalized.
    pub penalize_intercept: bool,
}

impl LassoConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be > 0".into()));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidArgument("max_sweeps must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            tolerance: 1e-9,
            max_sweeps: 10_000,
            penalize_intercept: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LassoResult {
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub sweeps: usize,
    /// Largest coefficient change in the final sweep.
    pub last_delta: f64,
    /// Objective value after every sweep.
    pub objective_trace: Vec<f64>,
}

impl LassoResult {
    pub fn into_converged(self) -> Result<Vec<f64>> {
        if self.converged {
            Ok(self.coefficients)
        } else {
            Err(Error::NotConverged {
                sweeps: self.sweeps,
                last_delta: self.last_delta,
            })
        }
    }
}

#[inline]
fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Cyclic coordinate descent with exact soft-threshold updates.
///
/// After each full sweep the nonzero coordinates are swept on their own
/// until they settle; convergence is only declared by a full sweep.
pub fn solve_lasso(problem: &DesignProblem, cfg: &LassoConfig) -> Result<LassoResult> {
    cfg.validate()?;
    if problem.rows() == 0 {
        return Err(Error::InvalidArgument("lasso needs at least one sample".into()));
    }
    let t = problem.rows() as f64;
    let p = problem.cols();
    let thresholds: Vec<f64> = problem
        .basis
        .iter()
        .map(|s| {
            if cfg.penalize_intercept || !s.is_empty() {
                cfg.lambda / 2.0
            } else {
                0.0
            }
        })
        .collect();
    let mut alpha = vec![0.0; p];
    // r = y - Xα
    let mut resid: Vec<f64> = problem.targets.clone();
    let mut sweeps = 0;
    let mut last_delta = f64::INFINITY;
    let mut trace = Vec::new();

    let objective = |resid: &[f64], alpha: &[f64]| -> f64 {
        let fit: f64 = resid.iter().map(|r| r * r).sum();
        fit + cfg.lambda * problem.penalized_l1(alpha, cfg)
    };

    let sweep = |coords: &mut dyn Iterator<Item = usize>, alpha: &mut [f64], resid: &mut [f64]| -> f64 {
        let mut max_delta: f64 = 0.0;
        for j in coords {
            let col = problem.column(j);
            let old = alpha[j];
            let rho: f64 = col.iter().zip(resid.iter()).map(|(x, r)| x * r).sum::<f64>() + t * old;
            let new = soft_threshold(rho, thresholds[j]) / t;
            let delta = new - old;
            if delta != 0.0 {
                for (r, x) in resid.iter_mut().zip(col) {
                    *r -= delta * x;
                }
                alpha[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        max_delta
    };

    while sweeps < cfg.max_sweeps {
        // refresh the residual so rounding drift cannot accumulate across sweeps
        let r = problem.residuals(&alpha);
        resid.iter_mut().zip(r).for_each(|(a, b)| *a = -b);
        last_delta = sweep(&mut (0..p), &mut alpha, &mut resid);
        sweeps += 1;
        trace.push(objective(&resid, &alpha));
        if last_delta < cfg.tolerance {
            return Ok(LassoResult {
                coefficients: alpha,
                converged: true,
                sweeps,
                last_delta,
                objective_trace: trace,
            });
        }
        let active: Vec<usize> = (0..p).filter(|&j| alpha[j] != 0.0).collect();
        while sweeps < cfg.max_sweeps {
            let d = sweep(&mut active.iter().copied(), &mut alpha, &mut resid);
            sweeps += 1;
            trace.push(objective(&resid, &alpha));
            last_delta = d;
            if d < cfg.tolerance {
                break;
            }
        }
    }
    Ok(LassoResult {
        coefficients: alpha,
        converged: false,
        sweeps,
        last_delta,
        objective_trace: trace,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointConfig {
    /// Weight of the sparsity loss `L_r`.
    pub lambda1: f64,
    /// Weight of the consensus loss `L_c`.
    pub lambda2: f64,
    pub eta: f64,
    pub epochs: usize,
}

impl JointConfig {
    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !ok(self.lambda1) || !ok(self.lambda2) {
            return Err(Error::InvalidArgument("lambda1 and lambda2 must be >= 0".into()));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta must be >= 0, got {}", self.eta)));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be >= 1".into()));
        }
        Ok(())
    }
}

/// Starting point of the subgradient loop.
#[derive(Clone, Debug, PartialEq)]
pub enum JointInit {
    Zero,
    /// Independent uniform draws in `[-half_width, half_width]`.
    Uniform { seed: u64, half_width: f64 },
    Given(Vec<Vec<f64>>),
}

/// The three loss terms at one epoch, and their weighted total.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointLoss {
    pub fit: f64,
    pub sparsity: f64,
    pub consensus: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointResult {
    pub coefficients: Vec<Vec<f64>>,
    /// Losses before each epoch, plus one entry for the final iterate.
    pub trajectory: Vec<JointLoss>,
}

/// Divergence guard on coefficient magnitude.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

struct JointState<'a> {
    problem: &'a DesignProblem,
    assignments: &'a [usize],
    k: usize,
    cfg: &'a JointConfig,
}

impl JointState<'_> {
    fn residuals(&self, alpha: &[Vec<f64>]) -> Vec<f64> {
        let mut r: Vec<f64> = self.problem.targets.iter().map(|y| -y).collect();
        for j in 0..self.problem.cols() {
            let col = self.problem.column(j);
            for (i, ri) in r.iter_mut().enumerate() {
                *ri += alpha[self.assignments[i]][j] * col[i];
            }
        }
        r
    }

    fn mean(&self, alpha: &[Vec<f64>]) -> Vec<f64> {
        let p = self.problem.cols();
        let mut m = vec![0.0; p];
        for a in alpha {
            for (mj, aj) in m.iter_mut().zip(a) {
                *mj += aj;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.k as f64);
        m
    }

    fn loss(&self, alpha: &[Vec<f64>], resid: &[f64]) -> JointLoss {
        let t = self.problem.rows().max(1) as f64;
        let k = self.k as f64;
        let fit = resid.iter().map(|r| r * r).sum::<f64>() / t;
        let sparsity = alpha.iter().map(|a| a.iter().map(|v| v.abs()).sum::<f64>()).sum::<f64>() / k;
        let m = self.mean(alpha);
        let consensus = alpha
            .iter()
            .map(|a| a.iter().zip(&m).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
            .sum::<f64>()
            / k;
        JointLoss {
            fit,
            sparsity,
            consensus,
            total: fit + self.cfg.lambda1 * sparsity + self.cfg.lambda2 * consensus,
        }
    }

    fn gradient(&self, alpha: &[Vec<f64>], resid: &[f64]) -> Vec<Vec<f64>> {
        let p = self.problem.cols();
        let t = self.problem.rows().max(1) as f64;
        let k = self.k as f64;
        let mut grad = vec![vec![0.0; p]; self.k];
        for j in 0..p {
            let col = self.problem.column(j);
            for (i, (r, x)) in resid.iter().zip(col).enumerate() {
                grad[self.assignments[i]][j] += 2.0 * r * x / t;
            }
        }
        if self.cfg.lambda1 != 0.0 {
            for (g, a) in grad.iter_mut().zip(alpha) {
                for (gj, aj) in g.iter_mut().zip(a) {
                    // sign(0) = 0
                    let s = if *aj > 0.0 {
                        1.0
                    } else if *aj < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    *gj += self.cfg.lambda1 * s / k;
                }
            }
        }
        if self.cfg.lambda2 != 0.0 {
            let m = self.mean(alpha);
            let units: Vec<Vec<f64>> = alpha
                .iter()
                .map(|a| {
                    let d: Vec<f64> = a.iter().zip(&m).map(|(x, y)| x - y).collect();
                    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        d.into_iter().map(|v| v / norm).collect()
                    } else {
                        vec![0.0; p]
                    }
                })
                .collect();
            let mut unit_mean = vec![0.0; p];
            for u in &units {
                for (s, v) in unit_mean.iter_mut().zip(u) {
                    *s += v / k;
                }
            }
            for (g, u) in grad.iter_mut().zip(&units) {
                for ((gj, uj), mj) in g.iter_mut().zip(u).zip(&unit_mean) {
                    *gj += self.cfg.lambda2 * (uj - mj) / k;
                }
            }
        }
        grad
    }
}

/// Exactly `epochs` full-batch subgradient steps on
/// `L_f + λ₁ L_r + λ₂ L_c` for `k` anchored coefficient vectors.
///
/// `assignments[i]` names the anchor whose model predicts sample `i`.
pub fn solve_joint(
    assignments: &[usize],
    k: usize,
    problem: &DesignProblem,
    cfg: &JointConfig,
    init: &JointInit,
) -> Result<JointResult> {
    cfg.validate()?;
    if k == 0 {
        return Err(Error::InvalidArgument("at least one anchor is required".into()));
    }
    if assignments.len() != problem.rows() {
        return Err(Error::InvalidArgument(format!(
            "{} assignments for {} samples",
            assignments.len(),
            problem.rows()
        )));
    }
    if let Some(a) = assignments.iter().find(|&&a| a >= k) {
        return Err(Error::InvalidArgument(format!("anchor index {a} outside [0, {k})")));
    }
    let p = problem.cols();
    let mut alpha = match init {
        JointInit::Zero => vec![vec![0.0; p]; k],
        JointInit::Uniform { seed, half_width } => {
            let mut rng = rng_from(*seed);
            (0..k)
                .map(|_| {
                    (0..p)
                        .map(|_| rng.random_range(-*half_width..=*half_width))
                        .collect()
                })
                .collect()
        }
        JointInit::Given(v) => {
            if v.len() != k || v.iter().any(|a| a.len() != p) {
                return Err(Error::InvalidArgument("initial coefficients have the wrong shape".into()));
            }
            v.clone()
        }
    };
    let state = JointState {
        problem,
        assignments,
        k,
        cfg,
    };
    let mut trajectory = Vec::with_capacity(cfg.epochs + 1);
    for epoch in 0..cfg.epochs {
        let resid = state.residuals(&alpha);
        trajectory.push(state.loss(&alpha, &resid));
        let grad = state.gradient(&alpha, &resid);
        for (a, g) in alpha.iter_mut().zip(&grad) {
            for (aj, gj) in a.iter_mut().zip(g) {
                *aj -= cfg.eta * gj;
            }
        }
        if alpha.iter().flatten().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
            return Err(Error::Diverged {
                epoch: epoch + 1,
                trajectory,
            });
        }
    }
    let resid = state.residuals(&alpha);
    trajectory.push(state.loss(&alpha, &resid));
    Ok(JointResult {
        coefficients: alpha,
        trajectory,
    })
}
