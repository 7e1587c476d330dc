//! Maximum-likelihood estimation of the scoreline-model coefficients.
//!
//! Both model variants share the likelihood of the corrected double-Poisson
//! model; the independent variant simply pins `rho = 0`. The likelihood uses
//! exact (untruncated) Poisson masses — grid truncation exists only on the
//! simulation side.
//!
//! Elo standardisation constants are computed from the pooled set of all
//! team-match Elo appearances in the training data (each match contributes
//! its home and its away rating) and frozen into the returned
//! [`ModelParams`], so that predictions reuse the training-time constants.

use crate::domain::{MatchObservation, ModelParams};
use crate::error::{Error, Result};
use crate::scoreline::{self, GoalRates};

/// Which model to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Independent double Poisson (`rho` fixed at 0).
    Independent,
    /// Dixon-Coles with free dependence parameter.
    DixonColes,
}

impl ModelKind {
    /// Number of free parameters.
    pub fn dim(&self) -> usize {
        match self {
            ModelKind::Independent => 3,
            ModelKind::DixonColes => 4,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Independent => "independent",
            ModelKind::DixonColes => "dixon_coles",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(ModelKind::Independent),
            "dixon_coles" | "dixon-coles" => Ok(ModelKind::DixonColes),
            other => Err(Error::InvalidArgument(format!(
                "unknown model kind `{other}`"
            ))),
        }
    }
}

/// Optimiser knobs.
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Iteration cap for each simplex descent.
    pub max_iterations: usize,
    /// Convergence threshold on the simplex's log-likelihood spread.
    pub tolerance: f64,
    /// Number of simplex restarts around the incumbent optimum.
    pub restarts: usize,
    /// Compute finite-difference standard errors on success.
    pub std_errors: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tolerance: 1e-9,
            restarts: 2,
            std_errors: true,
        }
    }
}

/// Outcome of a fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: ModelKind,
    pub params: ModelParams,
    pub log_likelihood: f64,
    /// In parameter order `beta0, beta1, beta2[, rho]`; `None` when the
    /// observed information could not be inverted or was not requested.
    pub std_errors: Option<Vec<f64>>,
    pub converged: bool,
    pub n_obs: usize,
}

/// Minimum number of observations accepted by [`fit`].
pub const MIN_OBSERVATIONS: usize = 20;

/// Margin by which the `rho` box is shrunk to keep every correction factor
/// strictly positive inside the likelihood.
const RHO_MARGIN: f64 = 1e-6;

struct PreparedMatch {
    x: u32,
    y: u32,
    /// Standardised Elo difference.
    d: f64,
    ln_fact_x: f64,
    ln_fact_y: f64,
}

struct Prepared {
    rows: Vec<PreparedMatch>,
    elo_mean: f64,
    elo_sd: f64,
}

fn prepare(matches: &[MatchObservation]) -> Result<Prepared> {
    if matches.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot fit on an empty match list".into(),
        ));
    }
    let n = matches.len() as f64;
    let mut sum = 0.0;
    for m in matches {
        sum += m.home_elo + m.away_elo;
    }
    let mean = sum / (2.0 * n);
    let mut ss = 0.0;
    for m in matches {
        ss += (m.home_elo - mean).powi(2) + (m.away_elo - mean).powi(2);
    }
    // Sample standard deviation over the 2n pooled appearances.
    let sd = (ss / (2.0 * n - 1.0)).sqrt();
    if sd <= 0.0 || sd.is_nan() {
        return Err(Error::DegenerateData(
            "Elo ratings have zero variance; the difference predictor is unidentifiable".into(),
        ));
    }
    let rows = matches
        .iter()
        .map(|m| PreparedMatch {
            x: m.home_goals,
            y: m.away_goals,
            d: (m.home_elo - m.away_elo) / sd,
            ln_fact_x: ln_fact(m.home_goals),
            ln_fact_y: ln_fact(m.away_goals),
        })
        .collect();
    Ok(Prepared {
        rows,
        elo_mean: mean,
        elo_sd: sd,
    })
}

fn ln_fact(k: u32) -> f64 {
    (2..=k).map(|i| f64::from(i).ln()).sum()
}

/// Compensated (Kahan) accumulator; keeps the reduction bit-stable no matter
/// how callers batch the terms.
#[derive(Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Exact log-likelihood of the coefficients on the given matches.
///
/// Fails with the index of the first offending match if `rho` drives a
/// low-score correction factor to zero or below.
pub fn log_likelihood(params: &ModelParams, matches: &[MatchObservation]) -> Result<f64> {
    if matches.is_empty() {
        return Err(Error::InvalidArgument(
            "log_likelihood requires at least one match".into(),
        ));
    }
    let mut acc = KahanSum::default();
    for (i, m) in matches.iter().enumerate() {
        let rates = scoreline::expected_goals(params, m.home_elo, m.away_elo)?;
        let t = scoreline::tau_unchecked(m.home_goals, m.away_goals, rates, params.rho);
        if t <= 0.0 {
            return Err(Error::InvalidRho {
                rho: params.rho,
                detail: format!(
                    "correction factor non-positive ({t}) for match {i} ({}:{})",
                    m.home_goals, m.away_goals
                ),
            });
        }
        acc.add(ln_scoreline_prob(
            m.home_goals,
            m.away_goals,
            rates,
            t,
            ln_fact(m.home_goals),
            ln_fact(m.away_goals),
        ));
    }
    Ok(acc.value())
}

fn ln_scoreline_prob(x: u32, y: u32, rates: GoalRates, tau: f64, lfx: f64, lfy: f64) -> f64 {
    tau.ln() + f64::from(x) * rates.lambda().ln() - rates.lambda() - lfx
        + f64::from(y) * rates.mu().ln()
        - rates.mu()
        - lfy
}

/// Per-candidate objective state shared by the optimiser.
struct Objective<'a> {
    prep: &'a Prepared,
    model: ModelKind,
}

impl Objective<'_> {
    /// Negative log-likelihood at `theta = [beta0, beta1, beta2(, rho)]`.
    ///
    /// For the Dixon-Coles variant `rho` is clamped into the tightest
    /// admissible box across the training matches (shrunk by a small
    /// margin), which both enforces the constraint and keeps the surface
    /// finite for any simplex proposal.
    fn eval(&self, theta: &[f64]) -> f64 {
        let (ll, _) = self.eval_inner(theta);
        -ll
    }

    fn effective_rho(&self, theta: &[f64]) -> f64 {
        self.eval_inner(theta).1
    }

    fn eval_inner(&self, theta: &[f64]) -> (f64, f64) {
        let (b0, b1, b2) = (theta[0], theta[1], theta[2]);
        let rates: Vec<GoalRates> = self
            .prep
            .rows
            .iter()
            .map(|r| {
                let lambda = (b0 + b1 * r.d + b2).exp();
                let mu = (b0 - b1 * r.d).exp();
                GoalRates::new(lambda, mu).unwrap_or_else(|_| {
                    // Overflowed proposals get an effectively infinite
                    // penalty through the clamp below.
                    GoalRates::new(f64::MAX.sqrt(), f64::MAX.sqrt()).unwrap()
                })
            })
            .collect();

        let rho = match self.model {
            ModelKind::Independent => 0.0,
            ModelKind::DixonColes => {
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for r in &rates {
                    let (l, h) = scoreline::rho_bounds(*r);
                    lo = lo.max(l);
                    hi = hi.min(h);
                }
                theta[3].clamp(lo + RHO_MARGIN, hi - RHO_MARGIN)
            }
        };

        let mut acc = KahanSum::default();
        for (row, rate) in self.prep.rows.iter().zip(&rates) {
            let t = scoreline::tau_unchecked(row.x, row.y, *rate, rho);
            if t <= 0.0 {
                return (f64::NEG_INFINITY, rho);
            }
            acc.add(ln_scoreline_prob(
                row.x,
                row.y,
                *rate,
                t,
                row.ln_fact_x,
                row.ln_fact_y,
            ));
        }
        let ll = acc.value();
        if ll.is_nan() {
            (f64::NEG_INFINITY, rho)
        } else {
            (ll, rho)
        }
    }
}

/// Fit the model by maximum likelihood.
///
/// Returns `converged = false` (rather than an error) when the iteration
/// cap is exhausted before the simplex spread drops below the tolerance.
pub fn fit(
    matches: &[MatchObservation],
    model: ModelKind,
    options: &FitOptions,
) -> Result<FitResult> {
    if matches.len() < MIN_OBSERVATIONS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_OBSERVATIONS} matches to fit, got {}",
            matches.len()
        )));
    }
    let first = (matches[0].home_goals, matches[0].away_goals);
    if matches
        .iter()
        .all(|m| (m.home_goals, m.away_goals) == first)
    {
        return Err(Error::DegenerateData(format!(
            "all {} scorelines are identical ({}:{})",
            matches.len(),
            first.0,
            first.1
        )));
    }

    let prep = prepare(matches)?;
    let objective = Objective {
        prep: &prep,
        model,
    };

    let total_goals: u64 = matches
        .iter()
        .map(|m| u64::from(m.home_goals) + u64::from(m.away_goals))
        .sum();
    let mean_goals_per_team = (total_goals as f64 / (2.0 * matches.len() as f64)).max(1e-3);
    let mut start = vec![mean_goals_per_team.ln(), 0.1, 0.2];
    if model == ModelKind::DixonColes {
        start.push(0.0);
    }

    let mut steps = vec![0.25, 0.1, 0.1];
    if model == ModelKind::DixonColes {
        steps.push(0.05);
    }

    let mut best = nelder_mead(
        |t| objective.eval(t),
        &start,
        &steps,
        options.tolerance,
        options.max_iterations,
    );
    for _ in 0..options.restarts {
        let shrunk: Vec<f64> = steps.iter().map(|s| s * 0.25).collect();
        let next = nelder_mead(
            |t| objective.eval(t),
            &best.x,
            &shrunk,
            options.tolerance,
            options.max_iterations,
        );
        if next.fmin < best.fmin {
            best = next;
        }
    }

    let rho_hat = match model {
        ModelKind::Independent => 0.0,
        ModelKind::DixonColes => objective.effective_rho(&best.x),
    };
    let params = ModelParams::new(
        best.x[0],
        best.x[1],
        best.x[2],
        rho_hat,
        prep.elo_mean,
        prep.elo_sd,
    )?;
    let ll = log_likelihood(&params, matches)?;

    let std_errors = if options.std_errors {
        standard_errors(&params, matches, model).ok()
    } else {
        None
    };

    Ok(FitResult {
        model,
        params,
        log_likelihood: ll,
        std_errors,
        converged: best.converged,
        n_obs: matches.len(),
    })
}

/// Standard errors from the inverse negative Hessian of the log-likelihood,
/// with the Hessian approximated by central finite differences.
///
/// Parameter order is `beta0, beta1, beta2` for the independent model and
/// `beta0, beta1, beta2, rho` for Dixon-Coles.
pub fn standard_errors(
    params: &ModelParams,
    matches: &[MatchObservation],
    model: ModelKind,
) -> Result<Vec<f64>> {
    let dim = model.dim();
    let theta = match model {
        ModelKind::Independent => vec![params.beta0, params.beta1, params.beta2],
        ModelKind::DixonColes => vec![params.beta0, params.beta1, params.beta2, params.rho],
    };
    let eval = |t: &[f64]| -> Result<f64> {
        let rho = if model == ModelKind::DixonColes {
            t[3]
        } else {
            0.0
        };
        let p = ModelParams::new(t[0], t[1], t[2], rho, params.elo_mean, params.elo_sd)?;
        log_likelihood(&p, matches)
    };

    let mut hessian = vec![vec![0.0; dim]; dim];
    let step: Vec<f64> = theta.iter().map(|v| 1e-4 * v.abs().max(1.0)).collect();
    for i in 0..dim {
        for j in i..dim {
            let mut tpp = theta.clone();
            let mut tpm = theta.clone();
            let mut tmp = theta.clone();
            let mut tmm = theta.clone();
            tpp[i] += step[i];
            tpp[j] += step[j];
            tpm[i] += step[i];
            tpm[j] -= step[j];
            tmp[i] -= step[i];
            tmp[j] += step[j];
            tmm[i] -= step[i];
            tmm[j] -= step[j];
            let h = (eval(&tpp)? - eval(&tpm)? - eval(&tmp)? + eval(&tmm)?)
                / (4.0 * step[i] * step[j]);
            hessian[i][j] = h;
            hessian[j][i] = h;
        }
    }

    // Negative Hessian = observed information.
    for row in &mut hessian {
        for v in row.iter_mut() {
            *v = -*v;
        }
    }
    let inv = invert(hessian).ok_or(Error::SingularInformation)?;
    let mut ses = Vec::with_capacity(dim);
    for (i, row) in inv.iter().enumerate() {
        let v = row[i];
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::SingularInformation);
        }
        ses.push(v.sqrt());
    }
    Ok(ses)
}

/// Gauss-Jordan inverse with partial pivoting; fine for the 3x3/4x4
/// information matrices this module sees.
fn invert(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                if f != 0.0 {
                    for j in 0..n {
                        a[i][j] -= f * a[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

struct SimplexResult {
    x: Vec<f64>,
    fmin: f64,
    converged: bool,
}

/// Standard Nelder-Mead downhill simplex (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2). Deterministic given the start point.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    start: &[f64],
    steps: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> SimplexResult {
    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += steps[i];
        let fp = f(&p);
        simplex.push((p, fp));
    }

    let mut converged = false;
    for _ in 0..max_iterations {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[dim].1 - simplex[0].1;
        if spread.abs() < tolerance {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(p, _)| p[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let reflect: Vec<f64> = (0..dim)
            .map(|j| centroid[j] + (centroid[j] - worst.0[j]))
            .collect();
        let f_reflect = f(&reflect);

        if f_reflect < simplex[0].1 {
            let expand: Vec<f64> = (0..dim)
                .map(|j| centroid[j] + 2.0 * (centroid[j] - worst.0[j]))
                .collect();
            let f_expand = f(&expand);
            simplex[dim] = if f_expand < f_reflect {
                (expand, f_expand)
            } else {
                (reflect, f_reflect)
            };
        } else if f_reflect < simplex[dim - 1].1 {
            simplex[dim] = (reflect, f_reflect);
        } else {
            let contract: Vec<f64> = (0..dim)
                .map(|j| centroid[j] + 0.5 * (worst.0[j] - centroid[j]))
                .collect();
            let f_contract = f(&contract);
            if f_contract < worst.1 {
                simplex[dim] = (contract, f_contract);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    for (v, b) in entry.0.iter_mut().zip(&best) {
                        *v = b + 0.5 * (*v - b);
                    }
                    entry.1 = f(&entry.0);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    SimplexResult {
        x: simplex[0].0.clone(),
        fmin: simplex[0].1,
        converged,
    }
}
