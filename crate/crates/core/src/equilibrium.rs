//! Linear Bayesian Nash equilibria, the closed-form disclosure baselines and
//! Bayesian-correlated-equilibrium residuals.
//!
//! Signals are stacked as `(ω_1, …, ω_n, γ)` with the payoff state last, the
//! same order as the `(a, γ)` blocks of a covariance solution.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameSpec, PSD_REL_TOL};
use crate::linalg;

/// Relative eigenvalue cut used for pseudo-inverses of rank-deficient priors.
pub const PINV_REL_TOL: f64 = 1e-10;
/// How far a numerically solved `X` may drift from the prior on its state block.
pub const SOLVED_STATE_TOL: f64 = 1e-5;
/// Negative eigenvalues down to this fraction of the largest entry are read as
/// rounding in numerically solved covariances.
pub const INDEFINITE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoStructure {
    pub signal_dims: Vec<usize>,
    #[serde(with = "crate::json::row_major")]
    pub joint_cov: DMatrix<f64>,
    #[serde(with = "crate::json::vector")]
    pub joint_mean: DVector<f64>,
}

/// Law of the stacked signal vector given a payoff-state realisation:
/// `ω | γ ~ N(mean + gain (γ - mu), cov)`.
#[derive(Debug, Clone)]
pub struct ConditionalSignal {
    pub mean: DVector<f64>,
    pub state_mean: DVector<f64>,
    pub gain: DMatrix<f64>,
    pub cov: DMatrix<f64>,
    factor: DMatrix<f64>,
}

impl ConditionalSignal {
    pub fn sample<R: Rng + ?Sized>(&self, gamma: &DVector<f64>, rng: &mut R) -> DVector<f64> {
        let k = self.factor.ncols();
        let xi = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.mean + &self.gain * (gamma - &self.state_mean) + &self.factor * xi
    }
}

impl InfoStructure {
    pub fn players(&self) -> usize {
        self.signal_dims.len()
    }

    pub fn signal_len(&self) -> usize {
        self.signal_dims.iter().sum()
    }

    /// Start index of each player's signal block.
    pub fn offsets(&self) -> Vec<usize> {
        self.signal_dims
            .iter()
            .scan(0, |acc, &m| {
                let start = *acc;
                *acc += m;
                Some(start)
            })
            .collect()
    }

    pub fn check_against(&self, g: &GameSpec) -> Result<()> {
        let n = g.n;
        if self.players() != n {
            return Err(Error::Dimension(format!(
                "structure has {} players, game has {n}",
                self.players()
            )));
        }
        if self.signal_dims.contains(&0) {
            return Err(Error::Dimension("every player needs a signal of dimension >= 1".into()));
        }
        let total = self.signal_len() + n;
        if self.joint_cov.shape() != (total, total) || self.joint_mean.len() != total {
            return Err(Error::Dimension(format!("joint law must have dimension {total}")));
        }
        let m = self.signal_len();
        let prior = self.joint_cov.view((m, m), (n, n));
        let scale = linalg::max_abs(&g.sigma).max(1.0);
        if (prior - &g.sigma).amax() > PSD_REL_TOL * scale {
            return Err(Error::InconsistentCovariance(
                "trailing state block differs from the game prior".into(),
            ));
        }
        Ok(())
    }

    fn block(&self, r: usize, rows: usize, c: usize, cols: usize) -> DMatrix<f64> {
        self.joint_cov.view((r, c), (rows, cols)).into_owned()
    }

    /// `cov(ω_i, ω_j)`.
    pub fn signal_cov(&self, i: usize, j: usize) -> DMatrix<f64> {
        let off = self.offsets();
        self.block(off[i], self.signal_dims[i], off[j], self.signal_dims[j])
    }

    /// `cov(ω_i, γ_k)` as a column.
    pub fn signal_state_cov(&self, i: usize, k: usize) -> DVector<f64> {
        let off = self.offsets();
        let col = self.signal_len() + k;
        self.joint_cov.view((off[i], col), (self.signal_dims[i], 1)).column(0).into_owned()
    }

    pub fn signal_mean(&self, i: usize) -> DVector<f64> {
        let off = self.offsets();
        self.joint_mean.rows(off[i], self.signal_dims[i]).into_owned()
    }

    /// Conditional law of all signals given the payoff state, using a
    /// pseudo-inverse of the prior so that rank-deficient priors work.
    pub fn signal_given_state(&self) -> Result<ConditionalSignal> {
        let m = self.signal_len();
        let n = self.joint_cov.nrows() - m;
        let v = self.block(0, m, 0, m);
        let c = self.block(0, m, m, n);
        let sigma = self.block(m, n, m, n);
        let gain = &c * linalg::pinv_sym(&sigma, PINV_REL_TOL);
        let cov = linalg::symmetrize(&(&v - &gain * c.transpose()));
        let eigs = linalg::sym_eigenvalues(&cov);
        let scale = linalg::max_abs(&self.joint_cov).max(1.0);
        if let Some(&lo) = eigs.first() {
            if lo < -INDEFINITE_TOL * scale {
                return Err(Error::InconsistentCovariance(format!(
                    "conditional covariance of signals given the state has eigenvalue {lo:.3e}"
                )));
            }
        }
        Ok(ConditionalSignal {
            mean: self.joint_mean.rows(0, m).into_owned(),
            state_mean: self.joint_mean.rows(m, n).into_owned(),
            gain,
            factor: linalg::psd_sqrt(&cov),
            cov,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumStrategy {
    /// Coefficient vector `b_i` per player.
    pub b: Vec<Vec<f64>>,
    /// Mean actions `ā`.
    #[serde(with = "crate::json::vector")]
    pub abar: DVector<f64>,
    /// Sup-norm residual of the stacked linear system.
    pub residual: f64,
    /// 2-norm condition number of the stacked system.
    pub condition: f64,
}

impl EquilibriumStrategy {
    /// Actions `a_i = ā_i + b_iᵀ(ω_i - E ω_i)` for one stacked signal draw.
    pub fn actions(&self, z: &InfoStructure, omega: &DVector<f64>) -> DVector<f64> {
        let off = z.offsets();
        DVector::from_fn(self.abar.len(), |i, _| {
            let dev: f64 = self.b[i]
                .iter()
                .enumerate()
                .map(|(k, bk)| bk * (omega[off[i] + k] - z.joint_mean[off[i] + k]))
                .sum();
            self.abar[i] + dev
        })
    }

    /// `n × M` matrix mapping centred stacked signals to centred actions.
    pub fn selection(&self, z: &InfoStructure) -> DMatrix<f64> {
        let off = z.offsets();
        let mut s = DMatrix::zeros(self.b.len(), z.signal_len());
        for (i, bi) in self.b.iter().enumerate() {
            for (k, v) in bi.iter().enumerate() {
                s[(i, off[i] + k)] = *v;
            }
        }
        s
    }
}

/// Solves `Σ_j H_ij cov(ω_i, ω_j) b_j = cov(ω_i, γ_i)` jointly for all players.
pub fn bne_coefficients(g: &GameSpec, z: &InfoStructure) -> Result<EquilibriumStrategy> {
    g.check_dims()?;
    z.check_against(g)?;
    let n = g.n;
    let off = z.offsets();
    let total = z.signal_len();
    let mut k = DMatrix::zeros(total, total);
    let mut rhs = DVector::zeros(total);
    for i in 0..n {
        for j in 0..n {
            let block = z.signal_cov(i, j) * g.h[(i, j)];
            k.view_mut((off[i], off[j]), (z.signal_dims[i], z.signal_dims[j])).copy_from(&block);
        }
        rhs.rows_mut(off[i], z.signal_dims[i]).copy_from(&z.signal_state_cov(i, i));
    }

    let sv = k.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0f64, |a, v| a.max(*v));
    let smin = sv.iter().fold(f64::INFINITY, |a, v| a.min(*v));
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !condition.is_finite() || condition > 1e14 {
        return Err(Error::EquilibriumSingular(format!("condition number {condition:.3e}")));
    }
    let sol = k
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::EquilibriumSingular("LU factorisation failed".into()))?;
    let residual = (&k * &sol - &rhs).amax();

    let b = (0..n).map(|i| sol.rows(off[i], z.signal_dims[i]).iter().copied().collect()).collect();
    Ok(EquilibriumStrategy { b, abar: g.mean_actions()?, residual, condition })
}

/// Covariance of `(a, γ)` and mean action of a 2n-dimensional action/state law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovSolution {
    #[serde(rename = "X", with = "crate::json::row_major")]
    pub x: DMatrix<f64>,
    #[serde(with = "crate::json::vector")]
    pub mean_a: DVector<f64>,
}

impl CovSolution {
    pub fn players(&self) -> usize {
        self.x.nrows() / 2
    }

    pub fn var_a(&self) -> DMatrix<f64> {
        let n = self.players();
        self.x.view((0, 0), (n, n)).into_owned()
    }

    pub fn cov_a_gamma(&self) -> DMatrix<f64> {
        let n = self.players();
        self.x.view((0, n), (n, n)).into_owned()
    }

    pub fn var_gamma(&self) -> DMatrix<f64> {
        let n = self.players();
        self.x.view((n, n), (n, n)).into_owned()
    }
}

pub fn no_info_solution(g: &GameSpec) -> Result<CovSolution> {
    let n = g.n;
    let mut x = DMatrix::zeros(2 * n, 2 * n);
    x.view_mut((n, n), (n, n)).copy_from(&g.sigma);
    Ok(CovSolution { x, mean_a: g.mean_actions()? })
}

pub fn full_info_solution(g: &GameSpec) -> Result<CovSolution> {
    let n = g.n;
    let hinv = g.h_inverse()?;
    let cross = &hinv * &g.sigma;
    let var_a = linalg::symmetrize(&(&cross * hinv.transpose()));
    let mut x = DMatrix::zeros(2 * n, 2 * n);
    x.view_mut((0, 0), (n, n)).copy_from(&var_a);
    x.view_mut((0, n), (n, n)).copy_from(&cross);
    x.view_mut((n, 0), (n, n)).copy_from(&cross.transpose());
    x.view_mut((n, n), (n, n)).copy_from(&g.sigma);
    Ok(CovSolution { x, mean_a: hinv * &g.mu })
}

/// `r_i = Σ_j H_ij X_ij - X_{i, n+i}`; zero exactly on equilibrium covariances.
pub fn bce_residuals(g: &GameSpec, x: &CovSolution) -> Result<DVector<f64>> {
    let n = g.n;
    if x.x.shape() != (2 * n, 2 * n) {
        return Err(Error::Dimension(format!("X must be {0}x{0}", 2 * n)));
    }
    Ok(DVector::from_fn(n, |i, _| {
        let row: f64 = (0..n).map(|j| g.h[(i, j)] * x.x[(i, j)]).sum();
        row - x.x[(i, n + i)]
    }))
}

/// Covariance of `(a, γ)` induced by playing `strat` under `z`.
pub fn induced_solution(g: &GameSpec, z: &InfoStructure, strat: &EquilibriumStrategy) -> Result<CovSolution> {
    z.check_against(g)?;
    let n = g.n;
    let m = z.signal_len();
    let s = strat.selection(z);
    let v = z.joint_cov.view((0, 0), (m, m));
    let c = z.joint_cov.view((0, m), (m, n));
    let var_a = linalg::symmetrize(&(&s * v * s.transpose()));
    let cross = &s * c;
    let mut x = DMatrix::zeros(2 * n, 2 * n);
    x.view_mut((0, 0), (n, n)).copy_from(&var_a);
    x.view_mut((0, n), (n, n)).copy_from(&cross);
    x.view_mut((n, 0), (n, n)).copy_from(&cross.transpose());
    x.view_mut((n, n), (n, n)).copy_from(&g.sigma);
    Ok(CovSolution { x, mean_a: strat.abar.clone() })
}

/// Direct-recommendation structure `ω_i = a_i` realising `x`.
///
/// Given `γ`, the designer draws `a | γ ~ N(ā + cov(a,γ)Σ⁺(γ-μ), var(a) - cov(a,γ)Σ⁺cov(γ,a))`.
/// A numerically solved `x` is first snapped onto the prior and, when its
/// obedience residuals are below [`SOLVED_STATE_TOL`], onto exact obedience by
/// adjusting `var(a_i)`; larger residuals are kept so that regret reports them.
pub fn conditional_info_structure(g: &GameSpec, x: &CovSolution) -> Result<InfoStructure> {
    let n = g.n;
    if x.x.shape() != (2 * n, 2 * n) || x.mean_a.len() != n {
        return Err(Error::Dimension(format!("X must be {0}x{0}", 2 * n)));
    }
    let scale = linalg::max_abs(&x.x).max(1.0);
    let lo = linalg::min_eig(&x.x);
    if lo < -INDEFINITE_TOL * scale {
        return Err(Error::InconsistentCovariance(format!("X has eigenvalue {lo:.3e}")));
    }
    let mut joint_mean = DVector::zeros(2 * n);
    joint_mean.rows_mut(0, n).copy_from(&x.mean_a);
    joint_mean.rows_mut(n, n).copy_from(&g.mu);
    let drift = (x.x.view((n, n), (n, n)) - &g.sigma).amax();
    if drift > SOLVED_STATE_TOL * scale {
        return Err(Error::InconsistentCovariance(format!(
            "state block of X differs from the prior by {drift:.3e}"
        )));
    }
    let mut joint_cov = linalg::symmetrize(&x.x);
    joint_cov.view_mut((n, n), (n, n)).copy_from(&g.sigma);
    let residual: Vec<f64> = (0..n)
        .map(|i| joint_cov[(i, n + i)] - (0..n).map(|j| g.h[(i, j)] * joint_cov[(i, j)]).sum::<f64>())
        .collect();
    if residual.iter().all(|r| r.abs() <= SOLVED_STATE_TOL * scale) {
        for (i, r) in residual.iter().enumerate() {
            joint_cov[(i, i)] += r / g.h[(i, i)];
        }
    }
    let z = InfoStructure { signal_dims: vec![1; n], joint_cov, joint_mean };
    z.check_against(g)?;
    z.signal_given_state()?;
    Ok(z)
}

/// Every player observes the whole payoff state.
pub fn full_info_structure(g: &GameSpec) -> InfoStructure {
    let n = g.n;
    let blocks = n + 1;
    let mut joint_cov = DMatrix::zeros(blocks * n, blocks * n);
    let mut joint_mean = DVector::zeros(blocks * n);
    for r in 0..blocks {
        joint_mean.rows_mut(r * n, n).copy_from(&g.mu);
        for c in 0..blocks {
            joint_cov.view_mut((r * n, c * n), (n, n)).copy_from(&g.sigma);
        }
    }
    InfoStructure { signal_dims: vec![n; n], joint_cov, joint_mean }
}

/// Independent unit-variance noise for every player.
pub fn uninformative_structure(g: &GameSpec) -> InfoStructure {
    let n = g.n;
    let mut joint_cov = DMatrix::zeros(2 * n, 2 * n);
    joint_cov.view_mut((0, 0), (n, n)).fill_with_identity();
    joint_cov.view_mut((n, n), (n, n)).copy_from(&g.sigma);
    let mut joint_mean = DVector::zeros(2 * n);
    joint_mean.rows_mut(n, n).copy_from(&g.mu);
    InfoStructure { signal_dims: vec![1; n], joint_cov, joint_mean }
}

/// Private noisy signals `ω_i = γ_i + ε_i` with `ε ~ N(0, noise)`.
pub fn noisy_private_structure(g: &GameSpec, noise: &DMatrix<f64>) -> Result<InfoStructure> {
    let n = g.n;
    if noise.shape() != (n, n) {
        return Err(Error::Dimension("noise covariance must be n x n".into()));
    }
    let mut joint_cov = DMatrix::zeros(2 * n, 2 * n);
    joint_cov.view_mut((0, 0), (n, n)).copy_from(&(&g.sigma + noise));
    joint_cov.view_mut((0, n), (n, n)).copy_from(&g.sigma);
    joint_cov.view_mut((n, 0), (n, n)).copy_from(&g.sigma);
    joint_cov.view_mut((n, n), (n, n)).copy_from(&g.sigma);
    let mut joint_mean = DVector::zeros(2 * n);
    joint_mean.rows_mut(0, n).copy_from(&g.mu);
    joint_mean.rows_mut(n, n).copy_from(&g.mu);
    Ok(InfoStructure { signal_dims: vec![1; n], joint_cov, joint_mean })
}
