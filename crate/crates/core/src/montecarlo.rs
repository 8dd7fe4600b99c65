//! Simulated play of a Gaussian information structure: covariance recovery,
//! objective estimates and obedience (regret) checks.
//!
//! Samples are split into `B = min(50, N / 2)` batches of near-equal size.
//! Batch `k` draws from the master generator `seeded_rng(seed)` advanced by
//! `k` calls to `jump()` (2¹²⁸ steps each), so batches are independent streams
//! and may run in parallel. Results are merged in batch order, which keeps
//! reports bit-identical for a given seed regardless of thread count.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{
    conditional_info_structure, CovSolution, EquilibriumStrategy, InfoStructure, INDEFINITE_TOL, PINV_REL_TOL,
};
use crate::error::{Error, Result};
use crate::game::{seeded_rng, GameSpec, SeededRng};
use crate::linalg;
use crate::objectives::FMatrix;

pub const MAX_BATCHES: usize = 50;

/// Sample mean with its standard error from i.i.d. batches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    /// `|mean - target| ≤ k · se`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub n_samples: usize,
    pub batches: usize,
    /// Empirical covariance of `(a, γ)`.
    #[serde(rename = "empirical_X", with = "crate::json::row_major")]
    pub empirical_x: DMatrix<f64>,
    #[serde(rename = "empirical_X_se", with = "crate::json::row_major")]
    pub empirical_x_se: DMatrix<f64>,
    #[serde(with = "crate::json::vector")]
    pub empirical_mean: DVector<f64>,
    pub objective_estimate: Option<Estimate>,
    /// Per-player expected gain from deviating to the conditional best response.
    pub regret: Vec<Estimate>,
    pub max_regret: Estimate,
}

/// Batch count for `n` samples.
pub fn batch_count(n: usize) -> usize {
    (n / 2).clamp(1, MAX_BATCHES)
}

/// Generators for each batch, by the jump rule in the module docs.
pub fn batch_rngs(seed: u64, batches: usize) -> Vec<SeededRng> {
    let mut rng = seeded_rng(seed);
    let mut out = Vec::with_capacity(batches);
    for _ in 0..batches {
        out.push(rng.clone());
        rng.jump();
    }
    out
}

/// Conditional best response of player `i` as an affine map of their own signal.
struct Responder {
    offset: usize,
    dim: usize,
    signal_mean: DVector<f64>,
    intercept: f64,
    gain: DVector<f64>,
    h_ii: f64,
}

impl Responder {
    fn best_response(&self, omega: &DVector<f64>) -> f64 {
        let centred = omega.rows(self.offset, self.dim) - &self.signal_mean;
        (self.intercept + self.gain.dot(&centred)) / self.h_ii
    }
}

fn responders(g: &GameSpec, z: &InfoStructure, strat: &EquilibriumStrategy) -> Vec<Responder> {
    let n = g.n;
    let off = z.offsets();
    (0..n)
        .map(|i| {
            let mut target = z.signal_state_cov(i, i);
            for j in (0..n).filter(|&j| j != i) {
                let bj = DVector::from_column_slice(&strat.b[j]);
                target -= z.signal_cov(i, j) * bj * g.h[(i, j)];
            }
            let gain = linalg::pinv_sym(&z.signal_cov(i, i), PINV_REL_TOL) * target;
            let others: f64 = (0..n).filter(|&j| j != i).map(|j| g.h[(i, j)] * strat.abar[j]).sum();
            Responder {
                offset: off[i],
                dim: z.signal_dims[i],
                signal_mean: z.signal_mean(i),
                intercept: g.mu[i] - others,
                gain,
                h_ii: g.h[(i, i)],
            }
        })
        .collect()
}

/// Running mean and centred second moment, merged with the pairwise update.
#[derive(Clone)]
struct Moments {
    count: usize,
    mean: DVector<f64>,
    m2: DMatrix<f64>,
}

impl Moments {
    fn new(d: usize) -> Self {
        Self { count: 0, mean: DVector::zeros(d), m2: DMatrix::zeros(d, d) }
    }

    fn push(&mut self, v: &DVector<f64>) {
        self.count += 1;
        let delta = v - &self.mean;
        self.mean += &delta / self.count as f64;
        let delta2 = v - &self.mean;
        self.m2.ger(1.0, &delta, &delta2, 1.0);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let total = na + nb;
        let delta = &other.mean - &self.mean;
        self.m2 += &other.m2 + &delta * delta.transpose() * (na * nb / total);
        self.mean += &delta * (nb / total);
        self.count += other.count;
    }

    fn cov(&self) -> DMatrix<f64> {
        linalg::symmetrize(&(&self.m2 / (self.count.max(2) - 1) as f64))
    }
}

struct BatchOut {
    moments: Moments,
    gain_mean: DVector<f64>,
}

fn run_batch(
    g: &GameSpec,
    z: &InfoStructure,
    strat: &EquilibriumStrategy,
    factor: &DMatrix<f64>,
    resp: &[Responder],
    size: usize,
    mut rng: SeededRng,
) -> BatchOut {
    let n = g.n;
    let m = z.signal_len();
    let k = factor.ncols();
    let mut moments = Moments::new(2 * n);
    let mut gains = DVector::zeros(n);
    let mut row = DVector::zeros(2 * n);
    for _ in 0..size {
        let xi = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let draw = &z.joint_mean + factor * xi;
        let omega = draw.rows(0, m).into_owned();
        let gamma = draw.rows(m, n);
        let a = strat.actions(z, &omega);
        for (i, r) in resp.iter().enumerate() {
            let br = r.best_response(&omega);
            let pressure: f64 = gamma[i] - (0..n).filter(|&j| j != i).map(|j| g.h[(i, j)] * a[j]).sum::<f64>();
            gains[i] += -r.h_ii * (br * br - a[i] * a[i]) + 2.0 * (br - a[i]) * pressure;
        }
        row.rows_mut(0, n).copy_from(&a);
        row.rows_mut(n, n).copy_from(&gamma);
        moments.push(&row);
    }
    BatchOut { moments, gain_mean: gains / size.max(1) as f64 }
}

fn batch_estimate(values: &[f64], overall: f64) -> Estimate {
    let b = values.len();
    if b < 2 {
        return Estimate { mean: overall, se: f64::NAN };
    }
    let mean = values.iter().sum::<f64>() / b as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    Estimate { mean: overall, se: (var / b as f64).sqrt() }
}

/// Draws `n_samples` i.i.d. `(ω, γ)` from the joint law of `z`, plays `strat`
/// and summarises the outcome.
pub fn simulate_play(
    g: &GameSpec,
    z: &InfoStructure,
    strat: &EquilibriumStrategy,
    f: Option<&FMatrix>,
    n_samples: usize,
    seed: u64,
) -> Result<SimReport> {
    g.check_dims()?;
    z.check_against(g)?;
    if n_samples < 2 {
        return Err(Error::Parameter(format!("need at least 2 samples, got {n_samples}")));
    }
    let n = g.n;
    if strat.b.len() != n
        || strat.abar.len() != n
        || strat.b.iter().zip(&z.signal_dims).any(|(b, &d)| b.len() != d)
    {
        return Err(Error::Dimension("strategy does not match the information structure".into()));
    }
    if let Some(f) = f {
        if f.players() != n {
            return Err(Error::Dimension("objective and game disagree on player count".into()));
        }
    }
    let scale = linalg::max_abs(&z.joint_cov).max(1.0);
    let lo = linalg::min_eig(&z.joint_cov);
    if lo < -INDEFINITE_TOL * scale {
        return Err(Error::InconsistentCovariance(format!(
            "joint signal-state covariance has eigenvalue {lo:.3e}"
        )));
    }
    if g.h.diagonal().iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Parameter("best responses need a positive diagonal of H".into()));
    }

    let factor = linalg::psd_sqrt(&z.joint_cov);
    let resp = responders(g, z, strat);
    let batches = batch_count(n_samples);
    let sizes: Vec<usize> = (0..batches)
        .map(|k| n_samples / batches + usize::from(k < n_samples % batches))
        .collect();
    let outs: Vec<BatchOut> = batch_rngs(seed, batches)
        .into_par_iter()
        .zip(sizes.par_iter())
        .map(|(rng, &size)| run_batch(g, z, strat, &factor, &resp, size, rng))
        .collect();

    let mut pooled = Moments::new(2 * n);
    for o in &outs {
        pooled.merge(&o.moments);
    }
    let empirical_x = pooled.cov();
    let batch_covs: Vec<DMatrix<f64>> = outs.iter().map(|o| o.moments.cov()).collect();
    let weights: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    let empirical_x_se = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let vals: Vec<f64> = batch_covs.iter().map(|m| m[(r, c)]).collect();
        batch_estimate(&vals, empirical_x[(r, c)]).se
    });

    let objective_estimate = f.map(|f| {
        let vals: Vec<f64> = batch_covs.iter().map(|m| linalg::frobenius(&f.f, m)).collect();
        batch_estimate(&vals, linalg::frobenius(&f.f, &empirical_x))
    });

    let total = n_samples as f64;
    let regret: Vec<Estimate> = (0..n)
        .map(|i| {
            let vals: Vec<f64> = outs.iter().map(|o| o.gain_mean[i]).collect();
            let overall = outs.iter().zip(&weights).map(|(o, w)| o.gain_mean[i] * w).sum::<f64>() / total;
            batch_estimate(&vals, overall)
        })
        .collect();
    let max_regret = regret
        .iter()
        .copied()
        .fold(None, |best: Option<Estimate>, e| match best {
            Some(b) if b.mean >= e.mean => Some(b),
            _ => Some(e),
        })
        .expect("at least one player");

    Ok(SimReport {
        n_samples,
        batches,
        empirical_x,
        empirical_x_se,
        empirical_mean: pooled.mean,
        objective_estimate,
        regret,
        max_regret,
    })
}

/// Obedient play of direct recommendations: `a_i = ω_i`.
pub fn obedient_strategy(x: &CovSolution) -> EquilibriumStrategy {
    let n = x.players();
    EquilibriumStrategy { b: vec![vec![1.0]; n], abar: x.mean_a.clone(), residual: 0.0, condition: 1.0 }
}

/// Monte Carlo estimate of the largest per-player gain from disobeying the
/// recommendations drawn from `x`.
pub fn regret_estimate(g: &GameSpec, x: &CovSolution, n_samples: usize, seed: u64) -> Result<Estimate> {
    let z = conditional_info_structure(g, x)?;
    let report = simulate_play(g, &z, &obedient_strategy(x), None, n_samples, seed)?;
    Ok(report.max_regret)
}

/// Expected gain from deviating to the best response, per player, from the
/// Gaussian moments of `x`: `H_ii m_i² + r_i² / (H_ii var(a_i))` with `r_i` the
/// obedience residual and `m_i = (μ_i - (Hā)_i) / H_ii`.
pub fn analytic_regret(g: &GameSpec, x: &CovSolution) -> Result<Vec<f64>> {
    g.check_dims()?;
    let n = g.n;
    if x.x.shape() != (2 * n, 2 * n) || x.mean_a.len() != n {
        return Err(Error::Dimension(format!("X must be {0}x{0}", 2 * n)));
    }
    let va = x.var_a();
    let cag = x.cov_a_gamma();
    let scale = linalg::max_abs(&x.x).max(1.0);
    Ok((0..n)
        .map(|i| {
            let hii = g.h[(i, i)];
            let mean_gap = (g.mu[i] - (0..n).map(|j| g.h[(i, j)] * x.mean_a[j]).sum::<f64>()) / hii;
            let r: f64 = cag[(i, i)] - (0..n).map(|j| g.h[(i, j)] * va[(i, j)]).sum::<f64>();
            let spread = if va[(i, i)] > 1e-14 * scale { r * r / (hii * va[(i, i)]) } else { 0.0 };
            hii * mean_gap * mean_gap + spread
        })
        .collect())
}
