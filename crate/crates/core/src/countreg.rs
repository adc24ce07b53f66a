//! Poisson and NB2 negative binomial regression by maximum likelihood.
//!
//! The negative binomial model uses a log link, `mu = exp(x . beta)`, and
//! `p = 1 / (1 + alpha * mu)`, so that
//!
//! ```text
//! P(y) = Γ(1/α + y) / (Γ(y + 1) Γ(1/α)) · p^(1/α) · (1 − p)^y
//! ```
//!
//! Dispersion is optimized on the log scale. Every gamma-function ratio is
//! evaluated in log space; `Γ(1/α + y) / Γ(1/α) · α^y` is rewritten as the
//! product `∏_{j<y} (1 + jα)`, which stays accurate as `α → 0` where the
//! direct log-gamma difference would cancel catastrophically.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::{digamma, ln_gamma};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

pub const LN_ALPHA_MIN: f64 = -20.0;
pub const LN_ALPHA_MAX: f64 = 10.0;
pub const MAX_LINEAR_PREDICTOR: f64 = 700.0;

const POISSON_GRAD_TOL: f64 = 1e-8;
const POISSON_MAX_ITER: usize = 50;
const NB_SCORE_TOL: f64 = 1e-6;
const NB_REL_LOGLIK_TOL: f64 = 1e-9;
const NB_MAX_ITER: usize = 200;
const MAX_HALVINGS: usize = 30;
/// Relative rounding slack allowed when comparing log-likelihood values.
const LOGLIK_ROUNDING: f64 = 1e-12;

/// Below this count the rising product is summed term by term.
const DIRECT_SUM_LIMIT: u64 = 64;
/// Above this shape (1/α) the asymptotic expansions replace log-gamma differences.
const ASYMPTOTIC_SHAPE: f64 = 20.0;

pub fn nb_mean(x: &[f64], coef: &[f64]) -> Result<f64> {
    let eta = dot(x, coef);
    if eta > MAX_LINEAR_PREDICTOR {
        return Err(Error::LinearPredictorOverflow(eta));
    }
    Ok(eta.exp())
}

pub fn nb_p(mu: f64, alpha: f64) -> f64 {
    1.0 / (1.0 + alpha * mu)
}

// Stirling-series remainder of ln Γ(x) for large x.
fn stirling_remainder(x: f64) -> f64 {
    let x2 = x * x;
    (1.0 / 12.0
        - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * x2)) / x2) / x2) / x2)
        / x
}

// ψ(x) - ln x + 1/(2x) for large x.
fn digamma_remainder(x: f64) -> f64 {
    let x2 = x * x;
    -(1.0 / 12.0
        - (1.0 / 120.0 - (1.0 / 252.0 - (1.0 / 240.0 - 1.0 / (132.0 * x2)) / x2) / x2) / x2)
        / x2
}

/// `Σ_{j<y} ln(1 + jα)`, i.e. `ln Γ(1/α + y) − ln Γ(1/α) + y ln α`.
pub fn log_rising(y: u64, alpha: f64) -> f64 {
    if y <= DIRECT_SUM_LIMIT {
        return (1..y).map(|j| (j as f64 * alpha).ln_1p()).sum();
    }
    let yf = y as f64;
    let r = 1.0 / alpha;
    if r >= ASYMPTOTIC_SHAPE {
        (r + yf - 0.5) * (yf / r).ln_1p() - yf + stirling_remainder(r + yf) - stirling_remainder(r)
    } else {
        ln_gamma(r + yf) - ln_gamma(r) + yf * alpha.ln()
    }
}

/// Derivative of [`log_rising`] with respect to `ln α`: `Σ_{j<y} jα / (1 + jα)`.
pub fn log_rising_dlnalpha(y: u64, alpha: f64) -> f64 {
    if y <= DIRECT_SUM_LIMIT {
        return (1..y)
            .map(|j| {
                let t = j as f64 * alpha;
                t / (1.0 + t)
            })
            .sum();
    }
    let yf = y as f64;
    let r = 1.0 / alpha;
    let digamma_diff = if r >= ASYMPTOTIC_SHAPE {
        (yf / r).ln_1p() - 0.5 / (r + yf) + 0.5 / r + digamma_remainder(r + yf)
            - digamma_remainder(r)
    } else {
        digamma(r + yf) - digamma(r)
    };
    yf - r * digamma_diff
}

pub fn poisson_log_pmf(y: u64, mu: f64) -> f64 {
    let yf = y as f64;
    let term = if y == 0 { 0.0 } else { yf * mu.ln() };
    term - mu - ln_gamma(yf + 1.0)
}

pub fn nb_log_pmf(y: u64, mu: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidDispersion(alpha));
    }
    Ok(nb_log_pmf_unchecked(y, mu, alpha))
}

fn nb_log_pmf_unchecked(y: u64, mu: f64, alpha: f64) -> f64 {
    let yf = y as f64;
    let log1p_am = (alpha * mu).ln_1p();
    let count_term = if y == 0 {
        0.0
    } else {
        yf * (mu.ln() - log1p_am)
    };
    log_rising(y, alpha) - ln_gamma(yf + 1.0) + count_term - log1p_am / alpha
}

fn linear_predictors(design: &DesignMatrix, columns: &[usize], coef: &[f64]) -> Result<Vec<f64>> {
    design
        .x
        .iter_rows()
        .map(|row| {
            let eta: f64 = columns.iter().zip(coef).map(|(&j, b)| row[j] * b).sum();
            if eta > MAX_LINEAR_PREDICTOR {
                Err(Error::LinearPredictorOverflow(eta))
            } else {
                Ok(eta)
            }
        })
        .collect()
}

fn all_columns(design: &DesignMatrix) -> Vec<usize> {
    (0..design.p()).collect()
}

fn check_dims(design: &DesignMatrix, coef: &[f64]) -> Result<()> {
    if coef.len() != design.p() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} design columns",
            coef.len(),
            design.p()
        )));
    }
    Ok(())
}

pub fn nb_loglik(design: &DesignMatrix, coef: &[f64], ln_alpha: f64) -> Result<f64> {
    check_dims(design, coef)?;
    nb_loglik_cols(design, &all_columns(design), coef, ln_alpha)
}

fn nb_loglik_cols(
    design: &DesignMatrix,
    columns: &[usize],
    coef: &[f64],
    ln_alpha: f64,
) -> Result<f64> {
    let alpha = ln_alpha.exp();
    let eta = linear_predictors(design, columns, coef)?;
    Ok(design
        .y
        .iter()
        .zip(&eta)
        .map(|(&y, &e)| nb_log_pmf_unchecked(y, e.exp(), alpha))
        .sum())
}

/// Gradient of [`nb_loglik`] with respect to `(coef, ln_alpha)`.
pub fn nb_score(design: &DesignMatrix, coef: &[f64], ln_alpha: f64) -> Result<Vec<f64>> {
    check_dims(design, coef)?;
    nb_score_cols(design, &all_columns(design), coef, ln_alpha)
}

fn nb_score_cols(
    design: &DesignMatrix,
    columns: &[usize],
    coef: &[f64],
    ln_alpha: f64,
) -> Result<Vec<f64>> {
    let alpha = ln_alpha.exp();
    let p = columns.len();
    let mut grad = vec![0.0; p + 1];
    let eta = linear_predictors(design, columns, coef)?;
    for (i, row) in design.x.iter_rows().enumerate() {
        let y = design.y[i];
        let yf = y as f64;
        let mu = eta[i].exp();
        let denom = 1.0 + alpha * mu;
        let w = (yf - mu) / denom;
        for (g, &j) in grad.iter_mut().zip(columns) {
            *g += row[j] * w;
        }
        grad[p] += log_rising_dlnalpha(y, alpha) - yf * alpha * mu / denom
            + (alpha * mu).ln_1p() / alpha
            - mu / denom;
    }
    Ok(grad)
}

pub fn poisson_loglik(design: &DesignMatrix, coef: &[f64]) -> Result<f64> {
    check_dims(design, coef)?;
    poisson_loglik_cols(design, &all_columns(design), coef)
}

fn poisson_loglik_cols(design: &DesignMatrix, columns: &[usize], coef: &[f64]) -> Result<f64> {
    let eta = linear_predictors(design, columns, coef)?;
    Ok(design
        .y
        .iter()
        .zip(&eta)
        .map(|(&y, &e)| poisson_log_pmf(y, e.exp()))
        .sum())
}

pub fn poisson_score(design: &DesignMatrix, coef: &[f64]) -> Result<Vec<f64>> {
    check_dims(design, coef)?;
    let cols = all_columns(design);
    Ok(poisson_score_info(design, &cols, coef)?.0)
}

fn poisson_score_info(
    design: &DesignMatrix,
    columns: &[usize],
    coef: &[f64],
) -> Result<(Vec<f64>, nalgebra::DMatrix<f64>)> {
    let p = columns.len();
    let eta = linear_predictors(design, columns, coef)?;
    let mut grad = vec![0.0; p];
    let mut info = nalgebra::DMatrix::<f64>::zeros(p, p);
    for (i, row) in design.x.iter_rows().enumerate() {
        let mu = eta[i].exp();
        let resid = design.y[i] as f64 - mu;
        for a in 0..p {
            let xa = row[columns[a]];
            grad[a] += xa * resid;
            if xa != 0.0 {
                for b in 0..=a {
                    info[(a, b)] += mu * xa * row[columns[b]];
                }
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            info[(b, a)] = info[(a, b)];
        }
    }
    Ok((grad, info))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Columns that enter a fit after all-zero columns are removed, checked for
/// full column rank.
fn working_columns(design: &DesignMatrix) -> Result<(Vec<usize>, Vec<String>)> {
    if design.n() == 0 {
        return Err(Error::EmptyInput("design has no rows".into()));
    }
    let zero = design.zero_columns();
    let dropped: Vec<String> = zero
        .iter()
        .map(|&j| design.column_names[j].clone())
        .collect();
    if !dropped.is_empty() {
        log::warn!(
            "dropping all-zero columns before fitting: {}",
            dropped.join(", ")
        );
    }
    let columns: Vec<usize> = (0..design.p()).filter(|j| !zero.contains(j)).collect();
    check_rank(design, &columns)?;
    Ok((columns, dropped))
}

/// Modified Gram-Schmidt over the scaled columns; a column whose residual
/// vanishes lies in the span of the ones before it.
fn check_rank(design: &DesignMatrix, columns: &[usize]) -> Result<()> {
    let n = design.n();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    for &j in columns {
        let col: Vec<f64> = design.x.column(j).collect();
        let scale = norm(&col);
        let mut v: Vec<f64> = col.iter().map(|x| x / scale).collect();
        for q in &basis {
            let r = dot(q, &v);
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= r * b);
        }
        let resid = norm(&v);
        if resid < 1e-9 {
            let mut involved = involved_columns(design, &kept, &col);
            involved.push(design.column_names[j].clone());
            return Err(Error::RankDeficient { columns: involved });
        }
        v.iter_mut().for_each(|a| *a /= resid);
        basis.push(v);
        kept.push(j);
    }
    debug_assert!(basis.iter().all(|q| q.len() == n));
    Ok(())
}

fn involved_columns(design: &DesignMatrix, kept: &[usize], target: &[f64]) -> Vec<String> {
    let sub = design.x.select_columns(kept).to_nalgebra();
    let b = nalgebra::DVector::from_column_slice(target);
    let Ok(coef) = sub.svd(true, true).solve(&b, 1e-12) else {
        return Vec::new();
    };
    kept.iter()
        .zip(coef.iter())
        .filter(|(_, c)| c.abs() > 1e-6)
        .map(|(&j, _)| design.column_names[j].clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonFit {
    pub column_names: Vec<String>,
    /// Indices into the design the fit was run on.
    pub columns: Vec<usize>,
    pub dropped_columns: Vec<String>,
    pub coef: Vec<f64>,
    pub cov: Matrix,
    pub loglik: f64,
    pub aic: f64,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
    pub diverged: bool,
}

pub fn fit_poisson(design: &DesignMatrix) -> Result<PoissonFit> {
    let (columns, dropped) = working_columns(design)?;
    let p = columns.len();
    let n = design.n();
    let ybar = design.y.iter().map(|&y| y as f64).sum::<f64>() / n as f64;

    let mut coef = vec![0.0; p];
    let intercept = columns
        .iter()
        .position(|&j| design.x.column(j).all(|v| v == 1.0));
    if let Some(i) = intercept {
        coef[i] = ybar.max(1e-8).ln();
    }
    let mut ll = poisson_loglik_cols(design, &columns, &coef)?;
    let mut converged = false;
    let mut iterations = 0;
    let all_zero = design.y.iter().all(|&y| y == 0);

    while iterations < POISSON_MAX_ITER && !all_zero {
        let (grad, info) = poisson_score_info(design, &columns, &coef)?;
        if norm(&grad) < POISSON_GRAD_TOL {
            converged = true;
            break;
        }
        let Some(chol) = info.clone().cholesky() else {
            break;
        };
        let step = chol.solve(&nalgebra::DVector::from_column_slice(&grad));
        let decrement = dot(&grad, step.as_slice());
        iterations += 1;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = coef
                .iter()
                .zip(step.iter())
                .map(|(c, s)| c + t * s)
                .collect();
            if let Ok(trial_ll) = poisson_loglik_cols(design, &columns, &trial) {
                if trial_ll >= ll {
                    coef = trial;
                    ll = trial_ll;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        // A vanishing Newton decrement means the remaining gradient is
        // rounding noise in the row sums.
        if !accepted || decrement < 1e-12 * ll.abs().max(1.0) {
            converged = decrement < 1e-10 * ll.abs().max(1.0);
            break;
        }
    }

    let (_, info) = poisson_score_info(design, &columns, &coef)?;
    let cov = info
        .clone()
        .cholesky()
        .map(|c| Matrix::from_nalgebra(&c.inverse()))
        .unwrap_or_else(|| Matrix::zeros(p, p));
    let diverged = all_zero || coef.iter().any(|c| !c.is_finite());
    if diverged {
        log::warn!("Poisson fit diverged: the response is identically zero");
    }
    Ok(PoissonFit {
        column_names: columns
            .iter()
            .map(|&j| design.column_names[j].clone())
            .collect(),
        columns,
        dropped_columns: dropped,
        coef,
        cov,
        loglik: ll,
        aic: -2.0 * ll + 2.0 * p as f64,
        n,
        converged: converged && !diverged,
        iterations,
        diverged,
    })
}

/// Starting values for [`fit_nb`].
#[derive(Debug, Clone, PartialEq)]
pub struct NbInit {
    pub coef: Vec<f64>,
    pub ln_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbFit {
    pub column_names: Vec<String>,
    /// Indices into the design the fit was run on.
    pub columns: Vec<usize>,
    pub dropped_columns: Vec<String>,
    pub coef: Vec<f64>,
    pub ln_alpha: f64,
    /// Covariance of `(coef, ln_alpha)`, (P+1) x (P+1).
    pub cov: Matrix,
    pub cov_reliable: bool,
    /// Dispersion ended on a clamp; its row and column of `cov` are zero and
    /// the coefficient block is conditional on the clamped value.
    pub ln_alpha_at_bound: bool,
    pub loglik: f64,
    pub init_loglik: f64,
    pub aic: f64,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
    pub score_norm: f64,
}

impl NbFit {
    pub fn alpha(&self) -> f64 {
        self.ln_alpha.exp()
    }

    pub fn num_params(&self) -> usize {
        self.coef.len() + 1
    }

    pub fn se(&self, j: usize) -> f64 {
        self.cov.get(j, j).sqrt()
    }

    pub fn fitted_means(&self, design: &DesignMatrix) -> Result<Vec<f64>> {
        Ok(linear_predictors(design, &self.columns, &self.coef)?
            .into_iter()
            .map(f64::exp)
            .collect())
    }
}

fn method_of_moments_alpha(design: &DesignMatrix, mu: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (&y, &m) in design.y.iter().zip(mu) {
        let r = y as f64 - m;
        num += r * r - m;
        den += m * m;
    }
    (num / den).max(1e-4)
}

/// Projected score: components pushing `ln_alpha` past an active clamp are zeroed.
fn project(grad: &mut [f64], ln_alpha: f64) -> bool {
    let last = grad.len() - 1;
    let at_lower = ln_alpha <= LN_ALPHA_MIN && grad[last] < 0.0;
    let at_upper = ln_alpha >= LN_ALPHA_MAX && grad[last] > 0.0;
    if at_lower || at_upper {
        grad[last] = 0.0;
        true
    } else {
        false
    }
}

fn fd_hessian(
    design: &DesignMatrix,
    columns: &[usize],
    theta: &[f64],
) -> Result<nalgebra::DMatrix<f64>> {
    let m = theta.len();
    let p = m - 1;
    let mut h = nalgebra::DMatrix::<f64>::zeros(m, m);
    let mut probe = theta.to_vec();
    for j in 0..m {
        let step = 1e-5 * (1.0 + theta[j].abs());
        probe[j] = theta[j] + step;
        let plus = nb_score_cols(design, columns, &probe[..p], probe[p])?;
        probe[j] = theta[j] - step;
        let minus = nb_score_cols(design, columns, &probe[..p], probe[p])?;
        probe[j] = theta[j];
        for i in 0..m {
            h[(i, j)] = (plus[i] - minus[i]) / (2.0 * step);
        }
    }
    Ok((&h + h.transpose()) * 0.5)
}

/// Solve `(-H + λI) d = g`, raising λ until the system is positive definite.
fn newton_direction(neg_h: &nalgebra::DMatrix<f64>, grad: &[f64]) -> Vec<f64> {
    let g = nalgebra::DVector::from_column_slice(grad);
    if let Some(chol) = neg_h.clone().cholesky() {
        return chol.solve(&g).as_slice().to_vec();
    }
    let scale = neg_h
        .diagonal()
        .iter()
        .map(|d| d.abs())
        .fold(1e-8, f64::max);
    let mut lambda = 1e-6 * scale;
    for _ in 0..40 {
        let shifted = neg_h + nalgebra::DMatrix::<f64>::identity(grad.len(), grad.len()) * lambda;
        if let Some(chol) = shifted.cholesky() {
            return chol.solve(&g).as_slice().to_vec();
        }
        lambda *= 10.0;
    }
    grad.iter().map(|x| x / scale).collect()
}

/// Invert the negative Hessian over the free parameters; returns `None` when
/// it is not positive definite.
fn covariance(neg_h: &nalgebra::DMatrix<f64>, alpha_free: bool) -> Option<Matrix> {
    let m = neg_h.nrows();
    let free = if alpha_free { m } else { m - 1 };
    let block = neg_h.view((0, 0), (free, free)).into_owned();
    let inv = block.cholesky()?.inverse();
    let mut cov = Matrix::zeros(m, m);
    for i in 0..free {
        for j in 0..free {
            cov.set(i, j, inv[(i, j)]);
        }
    }
    Some(cov)
}

/// Maximize the NB2 log-likelihood over `(coef, ln_alpha)` by Newton's method
/// with a finite-difference Hessian of the analytic score and a halving
/// line search that never accepts a decrease in log-likelihood.
pub fn fit_nb(design: &DesignMatrix, init: Option<NbInit>) -> Result<NbFit> {
    let (columns, dropped) = working_columns(design)?;
    let p = columns.len();
    let n = design.n();

    let (coef0, ln_alpha0) = match init {
        Some(init) => {
            if init.coef.len() != p {
                return Err(Error::Dimension(format!(
                    "initial values have {} coefficients, design has {p} working columns",
                    init.coef.len()
                )));
            }
            (init.coef, init.ln_alpha)
        }
        None => {
            let pois = fit_poisson(design)?;
            let mu: Vec<f64> = linear_predictors(design, &columns, &pois.coef)?
                .into_iter()
                .map(f64::exp)
                .collect();
            (pois.coef, method_of_moments_alpha(design, &mu).ln())
        }
    };

    let mut theta = coef0;
    theta.push(ln_alpha0.clamp(LN_ALPHA_MIN, LN_ALPHA_MAX));
    let mut ll = nb_loglik_cols(design, &columns, &theta[..p], theta[p])?;
    let init_loglik = ll;
    let mut prev_ll = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut grad_norm;

    loop {
        let mut grad = nb_score_cols(design, &columns, &theta[..p], theta[p])?;
        let bound_active = project(&mut grad, theta[p]);
        grad_norm = norm(&grad);
        let rel_change = (ll - prev_ll).abs() / ll.abs().max(1.0);
        if grad_norm < NB_SCORE_TOL && rel_change < NB_REL_LOGLIK_TOL {
            converged = true;
            break;
        }
        if iterations >= NB_MAX_ITER {
            break;
        }
        iterations += 1;

        let neg_h = -fd_hessian(design, &columns, &theta)?;
        let direction = if bound_active {
            let block = neg_h.view((0, 0), (p, p)).into_owned();
            let mut d = newton_direction(&block, &grad[..p]);
            d.push(0.0);
            d
        } else {
            newton_direction(&neg_h, &grad)
        };

        // Near the optimum the gain of a Newton step falls below the rounding
        // error of the log-likelihood sum; treat such steps as non-decreasing.
        let slack = LOGLIK_ROUNDING * ll.abs().max(1.0);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let mut trial: Vec<f64> = theta
                .iter()
                .zip(&direction)
                .map(|(a, d)| a + t * d)
                .collect();
            trial[p] = trial[p].clamp(LN_ALPHA_MIN, LN_ALPHA_MAX);
            if let Ok(trial_ll) = nb_loglik_cols(design, &columns, &trial[..p], trial[p]) {
                if trial_ll.is_finite() && trial_ll >= ll - slack {
                    theta = trial;
                    prev_ll = ll;
                    ll = trial_ll;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            // No representable ascent remains along the Newton direction.
            converged = grad_norm < NB_SCORE_TOL;
            break;
        }
    }

    let ln_alpha = theta[p];
    let at_bound = ln_alpha <= LN_ALPHA_MIN || ln_alpha >= LN_ALPHA_MAX;
    let neg_h = -fd_hessian(design, &columns, &theta)?;
    let (cov, cov_reliable) = match covariance(&neg_h, !at_bound) {
        Some(cov) => (cov, true),
        None => {
            log::warn!("negative Hessian is not positive definite; covariance unreliable");
            (Matrix::zeros(p + 1, p + 1), false)
        }
    };
    theta.pop();
    Ok(NbFit {
        column_names: columns
            .iter()
            .map(|&j| design.column_names[j].clone())
            .collect(),
        columns,
        dropped_columns: dropped,
        coef: theta,
        ln_alpha,
        cov,
        cov_reliable,
        ln_alpha_at_bound: at_bound,
        loglik: ll,
        init_loglik,
        aic: -2.0 * ll + 2.0 * (p + 1) as f64,
        n,
        converged,
        iterations,
        score_norm: grad_norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wald {
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
    pub p_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Two-sided normal p-value.
pub fn normal_two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

pub fn wald_from(estimate: f64, se: f64) -> Wald {
    let z = if estimate == 0.0 { 0.0 } else { estimate / se };
    Wald {
        estimate,
        se,
        z,
        p_value: normal_two_sided_p(z),
        ci_low: estimate - 1.96 * se,
        ci_high: estimate + 1.96 * se,
    }
}

/// Wald statistics for parameter `j`; `j == coef.len()` addresses `ln_alpha`.
pub fn wald(fit: &NbFit, j: usize) -> Result<Wald> {
    if !fit.cov_reliable {
        return Err(Error::UnreliableCovariance);
    }
    let estimate = match j.cmp(&fit.coef.len()) {
        std::cmp::Ordering::Less => fit.coef[j],
        std::cmp::Ordering::Equal => fit.ln_alpha,
        std::cmp::Ordering::Greater => {
            return Err(Error::Dimension(format!(
                "parameter index {j} out of range"
            )))
        }
    };
    Ok(wald_from(estimate, fit.se(j)))
}

/// Significance stars for the conventional 0.05 / 0.01 / 0.001 thresholds.
pub fn stars(p_value: f64) -> &'static str {
    if p_value < 0.001 {
        "***"
    } else if p_value < 0.01 {
        "**"
    } else if p_value < 0.05 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// Likelihood-ratio test of `alpha = 0`. The null sits on the boundary of the
/// parameter space, so the reference law is the ½χ²₀ + ½χ²₁ mixture.
pub fn lr_test_overdispersion(nb: &NbFit, pois: &PoissonFit) -> Result<LrTest> {
    if nb.n != pois.n {
        return Err(Error::MismatchedObservations(nb.n, pois.n));
    }
    let statistic = (2.0 * (nb.loglik - pois.loglik)).max(0.0);
    Ok(LrTest {
        statistic,
        p_value: boundary_mixture_p(statistic),
    })
}

pub fn boundary_mixture_p(statistic: f64) -> f64 {
    0.5 * erfc((statistic / 2.0).sqrt())
}

pub fn mean_absolute_error(y: &[u64], mu: &[f64]) -> f64 {
    y.iter()
        .zip(mu)
        .map(|(&y, m)| (y as f64 - m).abs())
        .sum::<f64>()
        / y.len() as f64
}

/// In-sample mean absolute error of the fitted means.
pub fn mae(design: &DesignMatrix, fit: &NbFit) -> Result<f64> {
    Ok(mean_absolute_error(&design.y, &fit.fitted_means(design)?))
}
