//! Linear-quadratic-Gaussian games in normal form.
//!
//! Player `i` chooses a real action `a_i` and receives
//!
//! ```text
//! u_i(a, γ) = -H_ii a_i² - 2 Σ_{j≠i} H_ij a_i a_j + 2 γ_i a_i
//! ```
//!
//! with the payoff state `γ ~ N(mu, Sigma)`. The opponent-only term that the
//! general model allows is taken to be identically zero throughout the crate.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// PSD tolerance, relative to the largest absolute eigenvalue.
pub const PSD_REL_TOL: f64 = 1e-9;

/// Generator used for every seeded draw in the crate: xoshiro256++ seeded
/// through SplitMix64 (`seed_from_u64`).
pub type SeededRng = Xoshiro256PlusPlus;

pub fn seeded_rng(seed: u64) -> SeededRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub n: usize,
    #[serde(rename = "H", with = "crate::json::row_major")]
    pub h: DMatrix<f64>,
    #[serde(with = "crate::json::vector")]
    pub mu: DVector<f64>,
    #[serde(rename = "Sigma", with = "crate::json::row_major")]
    pub sigma: DMatrix<f64>,
}

impl GameSpec {
    pub fn new(h: DMatrix<f64>, mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let game = Self { n: h.nrows(), h, mu, sigma };
        game.check_dims()?;
        Ok(game)
    }

    pub fn check_dims(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Dimension("player count must be positive".into()));
        }
        if self.h.shape() != (n, n) {
            return Err(Error::Dimension(format!("H is {:?}, expected ({n}, {n})", self.h.shape())));
        }
        if self.mu.len() != n {
            return Err(Error::Dimension(format!("mu has length {}, expected {n}", self.mu.len())));
        }
        if self.sigma.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "Sigma is {:?}, expected ({n}, {n})",
                self.sigma.shape()
            )));
        }
        Ok(())
    }

    pub fn h_inverse(&self) -> Result<DMatrix<f64>> {
        let inv = self.h.clone().try_inverse().ok_or(Error::SingularPayoff)?;
        if inv.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularPayoff);
        }
        Ok(inv)
    }

    /// Equilibrium mean action `H⁻¹ mu`.
    pub fn mean_actions(&self) -> Result<DVector<f64>> {
        Ok(self.h_inverse()? * &self.mu)
    }

    pub fn payoff(&self, i: usize, a: &DVector<f64>, gamma: &DVector<f64>) -> f64 {
        let cross: f64 = (0..self.n).filter(|&j| j != i).map(|j| self.h[(i, j)] * a[j]).sum();
        -self.h[(i, i)] * a[i] * a[i] - 2.0 * a[i] * cross + 2.0 * gamma[i] * a[i]
    }

    /// `∂u_i/∂a_i = 2(γ_i - Σ_j H_ij a_j)`.
    pub fn own_gradient(&self, i: usize, a: &DVector<f64>, gamma: &DVector<f64>) -> f64 {
        let row: f64 = (0..self.n).map(|j| self.h[(i, j)] * a[j]).sum();
        2.0 * (gamma[i] - row)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub smallest_eig_h_sym: f64,
    pub smallest_eig_sigma: f64,
    pub symmetry_defect_sigma: f64,
    pub messages: Vec<String>,
}

/// Checks the existence/uniqueness hypotheses: `H + Hᵀ ≻ 0` and `Sigma ⪰ 0`.
/// Only structural problems are errors; a merely invalid game gives `ok = false`.
pub fn validate_game(g: &GameSpec) -> Result<ValidationReport> {
    g.check_dims()?;
    let mut messages = Vec::new();

    let finite = g.h.iter().chain(g.mu.iter()).chain(g.sigma.iter()).all(|v| v.is_finite());
    if !finite {
        messages.push("non-finite entry in H, mu or Sigma".to_string());
        return Ok(ValidationReport {
            ok: false,
            smallest_eig_h_sym: f64::NAN,
            smallest_eig_sigma: f64::NAN,
            symmetry_defect_sigma: f64::NAN,
            messages,
        });
    }

    let h_sym = &g.h + g.h.transpose();
    let smallest_eig_h_sym = linalg::min_eig(&h_sym);
    let h_ok = smallest_eig_h_sym > 0.0;
    if !h_ok {
        messages.push(format!("H + H^T is not positive definite (smallest eigenvalue {smallest_eig_h_sym:.6e})"));
    }

    let symmetry_defect_sigma = linalg::symmetry_defect(&g.sigma);
    let scale = linalg::max_abs(&g.sigma).max(1.0);
    let sym_ok = symmetry_defect_sigma <= PSD_REL_TOL * scale;
    if !sym_ok {
        messages.push(format!("Sigma is not symmetric (defect {symmetry_defect_sigma:.3e})"));
    }

    let sigma_eigs = linalg::sym_eigenvalues(&g.sigma);
    let smallest_eig_sigma = sigma_eigs.first().copied().unwrap_or(0.0);
    let top = sigma_eigs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let psd_ok = smallest_eig_sigma >= -PSD_REL_TOL * top;
    if !psd_ok {
        messages.push(format!("Sigma is not positive semidefinite (smallest eigenvalue {smallest_eig_sigma:.6e})"));
    }

    Ok(ValidationReport {
        ok: h_ok && sym_ok && psd_ok,
        smallest_eig_h_sym,
        smallest_eig_sigma,
        symmetry_defect_sigma,
        messages,
    })
}

/// Unit diagonal with a common off-diagonal coefficient `h`; zero prior mean.
pub fn symmetric_game(n: usize, h: f64, sigma: DMatrix<f64>) -> Result<GameSpec> {
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 players, got {n}")));
    }
    let hm = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { h });
    GameSpec::new(hm, DVector::zeros(n), sigma)
}

/// Diagonal 4, off-diagonal `1 + c·U_ij` with `U_ij ~ Uniform[-1, 1]` drawn in
/// row-major order (diagonal skipped) from `seeded_rng(seed)`. The draws do not
/// depend on `c`, so sweeping `c` with a fixed seed rescales one asymmetry pattern.
pub fn asymmetric_game(n: usize, c: f64, seed: u64, sigma: DMatrix<f64>) -> Result<GameSpec> {
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 players, got {n}")));
    }
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Parameter(format!("asymmetry c must lie in [0, 1], got {c}")));
    }
    let mut rng = seeded_rng(seed);
    let mut hm = DMatrix::from_element(n, n, 4.0);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let u: f64 = rng.random_range(-1.0..=1.0);
                hm[(i, j)] = 1.0 + c * u;
            }
        }
    }
    GameSpec::new(hm, DVector::zeros(n), sigma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equicorrelated {
    pub cov: DMatrix<f64>,
    /// False when the requested pattern is not a valid covariance.
    pub psd: bool,
}

pub fn equicorrelated_cov(n: usize, diag: f64, off: f64) -> Equicorrelated {
    let cov = DMatrix::from_fn(n, n, |i, j| if i == j { diag } else { off });
    let psd = linalg::is_psd(&cov, PSD_REL_TOL);
    Equicorrelated { cov, psd }
}

/// Beauty contest `u_i = -(1-β)(a_i-γ)² - β(a_i - mean_{j≠i} a_j)²` with a
/// common zero-mean state of variance `common_state_var`, in normal form.
pub fn beauty_contest(n: usize, beta: f64, common_state_var: f64) -> Result<GameSpec> {
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 players, got {n}")));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::Parameter(format!("beta must lie in [0, 1), got {beta}")));
    }
    let off = -beta / (n as f64 - 1.0);
    let hm = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { off });
    let w = 1.0 - beta;
    let sigma = DMatrix::from_element(n, n, w * w * common_state_var);
    GameSpec::new(hm, DVector::zeros(n), sigma)
}

/// Bertrand price competition with demand `q_i = a - b p_i + Σ_{j≠i} p_j`
/// and marginal cost `γ_i ~ N(cost_mean, cost_cov)`.
///
/// Profit `(p_i - γ_i) q_i` becomes `H_ii = b`, `H_ij = -1/2` and the state
/// `γ'_i = (a + b γ_i)/2`; the `-γ_i(a + Σ_{j≠i} p_j)` part does not involve
/// `p_i` and is dropped.
pub fn bertrand(
    n: usize,
    a: f64,
    b: f64,
    cost_mean: DVector<f64>,
    cost_cov: DMatrix<f64>,
) -> Result<GameSpec> {
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 players, got {n}")));
    }
    if b <= 0.0 {
        return Err(Error::Parameter(format!("demand slope b must be positive, got {b}")));
    }
    if cost_mean.len() != n || cost_cov.shape() != (n, n) {
        return Err(Error::Dimension("cost prior does not match player count".into()));
    }
    let hm = DMatrix::from_fn(n, n, |i, j| if i == j { b } else { -0.5 });
    let mu = cost_mean.map(|m| (a + b * m) / 2.0);
    let sigma = cost_cov * (b * b / 4.0);
    GameSpec::new(hm, mu, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n)
    }

    #[test]
    fn validate_examples() {
        let g = symmetric_game(2, 0.5, id(2)).unwrap();
        assert!(validate_game(&g).unwrap().ok);

        let g = symmetric_game(2, 2.0, id(2)).unwrap();
        let r = validate_game(&g).unwrap();
        assert!(!r.ok);
        assert!((r.smallest_eig_h_sym + 2.0).abs() < 1e-12);

        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let g = symmetric_game(2, 0.5, sigma).unwrap();
        let r = validate_game(&g).unwrap();
        assert!(!r.ok);
        assert!((r.smallest_eig_sigma + 1.0).abs() < 1e-12);
    }

    #[test]
    fn validate_dimension_mismatch_is_error() {
        let g = GameSpec { n: 2, h: id(2), mu: DVector::zeros(3), sigma: id(2) };
        assert!(matches!(validate_game(&g), Err(Error::Dimension(_))));
    }

    #[test]
    fn validate_flags_asymmetric_sigma() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        let g = GameSpec { n: 2, h: id(2), mu: DVector::zeros(2), sigma };
        let r = validate_game(&g).unwrap();
        assert!(!r.ok);
        assert!((r.symmetry_defect_sigma - 0.1).abs() < 1e-15);
    }

    #[test]
    fn symmetric_builder() {
        let g = symmetric_game(3, 0.5, id(3)).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 1.0]);
        assert_eq!(g.h, expected);
        assert_eq!(symmetric_game(2, 0.0, id(2)).unwrap().h, id(2));
        let g = symmetric_game(4, -0.2, id(4)).unwrap();
        assert!(validate_game(&g).unwrap().ok);
        assert!(symmetric_game(1, 0.0, id(1)).is_err());
    }

    #[test]
    fn asymmetric_builder() {
        let g = asymmetric_game(3, 0.0, 11, id(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.h[(i, j)], if i == j { 4.0 } else { 1.0 });
            }
        }
        let g = asymmetric_game(4, 1.0, 7, id(4)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let v = g.h[(i, j)];
                if i == j {
                    assert_eq!(v, 4.0);
                } else {
                    assert!((0.0..=2.0).contains(&v));
                }
            }
        }
        let again = asymmetric_game(4, 1.0, 7, id(4)).unwrap();
        assert_eq!(g.h.as_slice(), again.h.as_slice());
        assert!(asymmetric_game(4, 1.5, 7, id(4)).is_err());
        assert!(asymmetric_game(4, -0.1, 7, id(4)).is_err());
    }

    #[test]
    fn equicorrelated() {
        let e = equicorrelated_cov(4, 4.0, 1.0);
        assert!(e.psd);
        assert_eq!(e.cov[(0, 0)], 4.0);
        assert_eq!(e.cov[(2, 3)], 1.0);
        let e = equicorrelated_cov(4, 0.44, 0.2);
        assert!(e.psd);
        assert_eq!(e.cov[(1, 1)], 0.44);
        let e = equicorrelated_cov(3, 2.5, 0.0);
        assert!(linalg::sym_eigenvalues(&e.cov).iter().all(|v| (v - 2.5).abs() < 1e-12));
        // 1 + 3·(-0.5) < 0: not a covariance
        assert!(!equicorrelated_cov(4, 1.0, -0.5).psd);
    }

    #[test]
    fn beauty_contest_normal_form() {
        let g = beauty_contest(3, 0.0, 1.0).unwrap();
        assert_eq!(g.h, id(3));
        let g = beauty_contest(3, 0.5, 2.0).unwrap();
        assert_eq!(g.h[(0, 1)], -0.25);
        assert_eq!(g.sigma[(0, 2)], 0.25 * 2.0);
        assert!(validate_game(&g).unwrap().ok);
        assert!(beauty_contest(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn bertrand_normal_form() {
        let g = bertrand(2, 0.0, 1.0, DVector::zeros(2), id(2)).unwrap();
        assert_eq!(g.h, DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]));
        assert!(g.sigma.iter().zip(id(2).iter()).all(|(s, i)| (s - i / 4.0).abs() < 1e-15));
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let g = bertrand(2, 3.0, 2.0, DVector::from_vec(vec![1.0, 2.0]), cov.clone()).unwrap();
        assert_eq!(g.sigma, cov);
        assert_eq!(g.mu.as_slice(), &[2.5, 3.5]);
        assert!(bertrand(2, 1.0, 0.0, DVector::zeros(2), id(2)).is_err());
    }

    #[test]
    fn json_schema_round_trip() {
        let text = r#"{"n":2,"H":[[1,0.5],[0.5,1]],"mu":[0,1],"Sigma":[[1,0],[0,1]]}"#;
        let g: GameSpec = serde_json::from_str(text).unwrap();
        assert_eq!(g.h[(0, 1)], 0.5);
        assert_eq!(g.mu[1], 1.0);
        let back: serde_json::Value = serde_json::to_value(&g).unwrap();
        assert_eq!(back["H"][1][0], 0.5);
    }
}
