//! Closed-form optimality certificates and thresholds that do not call the solver.

use std::fmt::Display;

use nalgebra::DMatrix;
use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::linalg;
use crate::objectives::{action_space_reduction, full_info_matrix, FMatrix};
use crate::sdp::{SolveResult, SolveStatus};

/// Relative eigenvalue cut used when factoring the prior covariance.
pub const RANK_REL_TOL: f64 = 1e-10;
/// Relative tolerance of the semidefiniteness tests.
pub const DEFINITENESS_REL_TOL: f64 = 1e-9;
/// Largest deviation accepted in `E = κH`.
pub const KAPPA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    FullInfoOptimalPublic,
    NoInfoOptimalPublic,
    /// Full disclosure is optimal over every Gaussian information structure.
    FullInfoOptimalGeneral,
    FullInfoNotOptimalGeneral,
    NoInfoNotOptimalGeneral,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestedMatrix {
    /// `Dᵀ F_H D` with `Σ = D Dᵀ`.
    #[serde(rename = "DtFhD")]
    ReducedFullInfo,
    /// Action-space reduction `E`.
    #[serde(rename = "E")]
    ActionSpace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdicts: Vec<Verdict>,
    pub tested: TestedMatrix,
    #[serde(with = "crate::json::row_major")]
    pub matrix: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub tol: f64,
    /// Rank `k` of the prior covariance.
    pub rank: usize,
    pub kappa: Option<f64>,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn primary(&self) -> Verdict {
        self.verdicts.first().copied().unwrap_or(Verdict::Inconclusive)
    }

    pub fn has(&self, v: Verdict) -> bool {
        self.verdicts.contains(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Sign {
    Psd,
    Nsd,
    Zero,
    Indefinite,
}

fn sign_pattern(eigs: &[f64], frob: f64, eps: f64) -> Sign {
    if frob <= eps {
        return Sign::Zero;
    }
    let lo = eigs.first().copied().unwrap_or(0.0);
    let hi = eigs.last().copied().unwrap_or(0.0);
    match (lo >= -eps, hi <= eps) {
        (true, _) => Sign::Psd,
        (false, true) => Sign::Nsd,
        _ => Sign::Indefinite,
    }
}

/// Public-signal certificate from the sign of `Dᵀ F_H D`.
pub fn public_certificate(g: &GameSpec, f: &FMatrix) -> Result<Certificate> {
    let fh = full_info_matrix(f, g)?;
    let d = linalg::low_rank_factor(&g.sigma, RANK_REL_TOL);
    let rank = d.ncols();
    let m = linalg::symmetrize(&(d.transpose() * &fh * &d));
    let eigenvalues = linalg::sym_eigenvalues(&m);
    let scale = linalg::spectral_norm_sym(&fh) * linalg::spectral_norm_sym(&g.sigma);
    let tol = DEFINITENESS_REL_TOL * scale.max(linalg::spectral_norm_sym(&m));
    let mut notes = Vec::new();
    let verdicts = match sign_pattern(&eigenvalues, m.norm(), tol) {
        Sign::Psd => vec![Verdict::FullInfoOptimalPublic, Verdict::NoInfoNotOptimalGeneral],
        Sign::Nsd => vec![Verdict::NoInfoOptimalPublic, Verdict::FullInfoNotOptimalGeneral],
        Sign::Zero => {
            notes.push("Dᵀ F_H D vanishes: every public structure gives the same value".into());
            vec![Verdict::Inconclusive]
        }
        Sign::Indefinite => {
            notes.push("Dᵀ F_H D is indefinite".into());
            vec![Verdict::Inconclusive]
        }
    };
    Ok(Certificate {
        verdicts,
        tested: TestedMatrix::ReducedFullInfo,
        matrix: m,
        eigenvalues,
        tol,
        rank,
        kappa: None,
        notes,
    })
}

/// Common-state certificate: `E = κ H` with `κ > 0` makes full disclosure
/// optimal over all structures. Premise failures give `Inconclusive` with a note.
pub fn common_state_certificate(g: &GameSpec, f: &FMatrix) -> Result<Certificate> {
    g.check_dims()?;
    let rank = linalg::low_rank_factor(&g.sigma, RANK_REL_TOL).ncols();
    let inconclusive = |matrix: DMatrix<f64>, note: String| {
        let eigenvalues = if matrix.is_empty() { Vec::new() } else { linalg::sym_eigenvalues(&matrix) };
        Certificate {
            verdicts: vec![Verdict::Inconclusive],
            tested: TestedMatrix::ActionSpace,
            matrix,
            eigenvalues,
            tol: KAPPA_TOL,
            rank,
            kappa: None,
            notes: vec![note],
        }
    };

    let s = g.sigma[(0, 0)];
    let spread = g.sigma.iter().fold(0.0f64, |m, v| m.max((v - s).abs()));
    if !(s > 0.0) || spread > KAPPA_TOL * s.abs().max(1.0) {
        return Ok(inconclusive(
            DMatrix::zeros(0, 0),
            "prior is not a common payoff state (equal entries, rank one)".into(),
        ));
    }
    let e = match action_space_reduction(f, g) {
        Ok(e) => e,
        Err(Error::ReductionInapplicable(why)) => {
            return Ok(inconclusive(DMatrix::zeros(0, 0), format!("reduction does not apply: {why}")))
        }
        Err(other) => return Err(other),
    };

    let kappa = linalg::frobenius(&e, &g.h) / linalg::frobenius(&g.h, &g.h);
    let deviation = linalg::max_abs(&(&e - &g.h * kappa));
    let tol = KAPPA_TOL * linalg::max_abs(&e).max(1.0);
    let eigenvalues = linalg::sym_eigenvalues(&e);
    if kappa > 0.0 && deviation <= tol {
        Ok(Certificate {
            verdicts: vec![Verdict::FullInfoOptimalGeneral],
            tested: TestedMatrix::ActionSpace,
            matrix: e,
            eigenvalues,
            tol,
            rank,
            kappa: Some(kappa),
            notes: Vec::new(),
        })
    } else {
        let mut c = inconclusive(e, format!("E is not a positive multiple of H (best κ = {kappa:.6e}, deviation {deviation:.3e})"));
        c.kappa = Some(kappa);
        c.tol = tol;
        Ok(c)
    }
}

/// Adds `NoInfoNotOptimalGeneral` when `E ≻ 0` and a converged solve beats the
/// no-information value by more than the solver tolerance. Returns whether it was added.
pub fn confirm_no_info_not_optimal(cert: &mut Certificate, r: &SolveResult, no_info: f64, tol: f64) -> bool {
    let e_pd = cert.tested == TestedMatrix::ActionSpace
        && cert.eigenvalues.first().is_some_and(|&lo| lo > cert.tol);
    let strict = r.status == SolveStatus::Converged && r.objective - no_info > 10.0 * tol * (1.0 + no_info.abs());
    let add = e_pd && strict && !cert.has(Verdict::NoInfoNotOptimalGeneral);
    if add {
        cert.verdicts.push(Verdict::NoInfoNotOptimalGeneral);
    }
    add
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub applies: bool,
    /// `Σ var(γ_i) ≥ 2h Σ_{i≠j} cov(γ_i, γ_j)`.
    pub diag_dom: bool,
    /// `0 < h < 1` or `-1/(n-1) < h < 0`.
    pub h_range: bool,
    /// Row-wise dominance `var(γ_i) ≥ Σ_{j≠i} |cov(γ_i, γ_j)|` for every `i`.
    pub cov_row_dominant: bool,
    pub h: Option<f64>,
    pub var_sum: f64,
    pub weighted_cov_sum: Option<f64>,
    pub reason: Option<String>,
}

/// Hypotheses of the symmetric-game full-disclosure theorem for unit-diagonal
/// `H` with a common off-diagonal `h`.
pub fn theorem1_check(g: &GameSpec) -> Result<Theorem1Report> {
    g.check_dims()?;
    let n = g.n;
    let sigma = &g.sigma;
    let var_sum: f64 = sigma.diagonal().sum();
    let cov_sum: f64 = sigma.sum() - var_sum;
    let cov_row_dominant = (0..n).all(|i| {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| sigma[(i, j)].abs()).sum();
        sigma[(i, i)] >= off
    });

    let h = if n >= 2 { g.h[(0, 1)] } else { 0.0 };
    let form = n >= 2
        && (0..n).all(|i| {
            (0..n).all(|j| {
                let want = if i == j { 1.0 } else { h };
                (g.h[(i, j)] - want).abs() <= 1e-12
            })
        });
    if !form {
        return Ok(Theorem1Report {
            applies: false,
            diag_dom: false,
            h_range: false,
            cov_row_dominant,
            h: None,
            var_sum,
            weighted_cov_sum: None,
            reason: Some("H is not unit-diagonal with a common off-diagonal h".into()),
        });
    }
    let weighted_cov_sum = 2.0 * h * cov_sum;
    let diag_dom = var_sum >= weighted_cov_sum;
    let h_range = (h > 0.0 && h < 1.0) || (h < 0.0 && h > -1.0 / (n as f64 - 1.0));
    let reason = match (h_range, diag_dom) {
        (true, true) => None,
        (false, _) => Some(format!("h = {h} is outside the admissible range")),
        (true, false) => Some("payoff-state covariance fails the dominance condition".into()),
    };
    Ok(Theorem1Report {
        applies: h_range && diag_dom,
        diag_dom,
        h_range,
        cov_row_dominant,
        h: Some(h),
        var_sum,
        weighted_cov_sum: Some(weighted_cov_sum),
        reason,
    })
}

/// `(1 - h) / (2 - h)`, the blended-objective weight below which welfare
/// dominates, for `0 < h < 1`.
pub fn lambda_threshold<T>(h: T) -> Result<T>
where
    T: Num + PartialOrd + Clone + Display,
{
    let one = T::one();
    if !(h > T::zero() && h < one) {
        return Err(Error::Parameter(format!("threshold needs 0 < h < 1, got {h}")));
    }
    let two = one.clone() + one.clone();
    Ok((one - h.clone()) / (two - h))
}

/// Eigenvalues of `T` for the blended objective on a symmetric game:
/// `((n-1)h + 1)(1 - λ)` on `𝟙` and `-λ + (1 - λ)(1 - h)` with multiplicity `n - 1`.
pub fn blended_t_eigenvalues<T>(n: usize, h: T, lambda: T) -> (T, T)
where
    T: Num + Clone + FromPrimitive,
{
    let one = T::one();
    let nm1 = T::from_usize(n.saturating_sub(1)).expect("player count fits the scalar type");
    let first = (nm1 * h.clone() + one.clone()) * (one.clone() - lambda.clone());
    let second = (one.clone() - lambda.clone()) * (one - h) - lambda;
    (first, second)
}

/// The matrix `T` itself: diagonal `1 - λ - λ(n-1)/n`, off-diagonal `λ/n + (1-λ)h`.
pub fn blended_t_matrix(n: usize, h: f64, lambda: f64) -> DMatrix<f64> {
    let nf = n as f64;
    let diag = 1.0 - lambda - lambda * (nf - 1.0) / nf;
    let off = lambda / nf + (1.0 - lambda) * h;
    DMatrix::from_fn(n, n, |i, j| if i == j { diag } else { off })
}

/// Closed-form inverse of the unit-diagonal common-`h` payoff matrix, `n ≥ 3`.
pub fn symmetric_h_inverse(n: usize, h: f64) -> Result<DMatrix<f64>> {
    if n < 3 {
        return Err(Error::Parameter(format!("closed-form inverse needs n >= 3, got {n}")));
    }
    let nf = n as f64;
    let den = -(nf - 1.0) * h * h + (nf - 2.0) * h + 1.0;
    if den.abs() <= 1e-14 {
        return Err(Error::SingularPayoff);
    }
    let diag = ((nf - 2.0) * h + 1.0) / den;
    let off = -h / den;
    Ok(DMatrix::from_fn(n, n, |i, j| if i == j { diag } else { off }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{asymmetric_game, equicorrelated_cov, symmetric_game};
    use crate::objectives::{blended_f, conformism_f, social_welfare_f};

    fn eq45() -> DMatrix<f64> {
        equicorrelated_cov(4, 4.0, 1.0).cov
    }

    #[test]
    fn welfare_is_full_info_public() {
        let g = symmetric_game(4, 0.5, eq45()).unwrap();
        let c = public_certificate(&g, &social_welfare_f(&g).unwrap()).unwrap();
        assert_eq!(c.primary(), Verdict::FullInfoOptimalPublic);
        assert!(c.has(Verdict::NoInfoNotOptimalGeneral));
        assert!(c.eigenvalues[0] > 0.0);
        assert_eq!(c.rank, 4);
    }

    #[test]
    fn conformism_is_no_info_public() {
        let g = symmetric_game(4, 0.5, eq45()).unwrap();
        let c = public_certificate(&g, &conformism_f(4).unwrap()).unwrap();
        assert_eq!(c.primary(), Verdict::NoInfoOptimalPublic);
        assert!(*c.eigenvalues.last().unwrap() <= c.tol);
    }

    #[test]
    fn blended_flips_at_threshold() {
        let h = 0.5;
        let g = symmetric_game(4, h, eq45()).unwrap();
        let thr = lambda_threshold(h).unwrap();
        let below = public_certificate(&g, &blended_f(&g, thr - 0.05).unwrap()).unwrap();
        let above = public_certificate(&g, &blended_f(&g, thr + 0.05).unwrap()).unwrap();
        assert_eq!(below.primary(), Verdict::FullInfoOptimalPublic);
        assert_ne!(above.primary(), Verdict::FullInfoOptimalPublic);
    }

    #[test]
    fn common_state_welfare_kappa_one() {
        let g = symmetric_game(3, 0.3, DMatrix::from_element(3, 3, 2.0)).unwrap();
        let c = common_state_certificate(&g, &social_welfare_f(&g).unwrap()).unwrap();
        assert_eq!(c.primary(), Verdict::FullInfoOptimalGeneral);
        assert!((c.kappa.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn common_state_conformism_inconclusive() {
        let g = symmetric_game(3, 0.3, DMatrix::from_element(3, 3, 2.0)).unwrap();
        let c = common_state_certificate(&g, &conformism_f(3).unwrap()).unwrap();
        assert_eq!(c.primary(), Verdict::Inconclusive);
    }

    #[test]
    fn common_state_asymmetric_inconclusive() {
        let g = asymmetric_game(4, 0.6, 3, DMatrix::from_element(4, 4, 1.0)).unwrap();
        let f = social_welfare_f(&g).unwrap();
        let c = common_state_certificate(&g, &f).unwrap();
        assert_eq!(c.primary(), Verdict::Inconclusive);
        let hs = linalg::symmetrize(&g.h);
        assert!(linalg::max_abs(&(&c.matrix - hs)) < 1e-12);
    }

    #[test]
    fn common_state_premise_checked() {
        let g = symmetric_game(3, 0.3, eq45().view((0, 0), (3, 3)).into_owned()).unwrap();
        let c = common_state_certificate(&g, &social_welfare_f(&g).unwrap()).unwrap();
        assert_eq!(c.primary(), Verdict::Inconclusive);
        assert!(!c.notes.is_empty());
    }

    #[test]
    fn theorem1_examples() {
        let r = theorem1_check(&symmetric_game(4, 0.5, eq45()).unwrap()).unwrap();
        assert_eq!(r.var_sum, 16.0);
        assert_eq!(r.weighted_cov_sum, Some(12.0));
        assert!(r.diag_dom && r.h_range && r.applies);

        let r = theorem1_check(&symmetric_game(4, 1.0, eq45()).unwrap()).unwrap();
        assert!(!r.h_range && !r.applies);
        assert!(theorem1_check(&symmetric_game(4, -0.3, eq45()).unwrap()).unwrap().h_range);
        assert!(!theorem1_check(&symmetric_game(4, -0.4, eq45()).unwrap()).unwrap().h_range);

        let g = asymmetric_game(4, 0.5, 1, eq45()).unwrap();
        let r = theorem1_check(&g).unwrap();
        assert!(!r.applies && r.reason.is_some());
    }

    #[test]
    fn theorem1_dominance_forms() {
        let g = symmetric_game(4, 0.6, equicorrelated_cov(4, 0.44, 0.2).cov).unwrap();
        let r = theorem1_check(&g).unwrap();
        assert!(!r.cov_row_dominant);
        assert!(!r.diag_dom);
        let g = symmetric_game(4, 0.2, equicorrelated_cov(4, 0.44, 0.2).cov).unwrap();
        assert!(theorem1_check(&g).unwrap().diag_dom);
    }

    #[test]
    fn thresholds() {
        assert!((lambda_threshold(0.25f64).unwrap() - 3.0 / 7.0).abs() < 1e-15);
        assert!((lambda_threshold(0.5f64).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((lambda_threshold(0.75f64).unwrap() - 0.2).abs() < 1e-15);
        assert!((lambda_threshold(1e-9f64).unwrap() - 0.5).abs() < 1e-9);
        let eps = 1e-3;
        assert!((lambda_threshold(1.0f64 - eps).unwrap() - eps / (1.0 + eps)).abs() < 1e-12);
        assert!(lambda_threshold(0.0).is_err());
        assert!(lambda_threshold(1.0).is_err());
        assert!(lambda_threshold(-0.1).is_err());
    }

    #[test]
    fn t_eigenvalues() {
        let (a, b) = blended_t_eigenvalues(4, 0.5f64, 0.2);
        assert!((a - 2.0).abs() < 1e-12 && (b - 0.2).abs() < 1e-12);
        assert_eq!(blended_t_eigenvalues(3, 0.0f64, 0.0), (1.0, 1.0));
        let eig = linalg::sym_eigenvalues(&blended_t_matrix(4, 0.5, 0.2));
        assert!((eig[0] - 0.2).abs() < 1e-12 && (eig[3] - 2.0).abs() < 1e-12);
        let thr = lambda_threshold(0.5f64).unwrap();
        assert!(blended_t_eigenvalues(4, 0.5, thr).1.abs() < 1e-15);
    }

    #[test]
    fn t_matrix_is_blended_reduction() {
        let g = symmetric_game(5, 0.3, DMatrix::from_element(5, 5, 1.0)).unwrap();
        let e = action_space_reduction(&blended_f(&g, 0.35).unwrap(), &g).unwrap();
        assert!(linalg::max_abs(&(e - blended_t_matrix(5, 0.3, 0.35))) < 1e-12);
    }

    #[test]
    fn closed_form_inverse() {
        let inv = symmetric_h_inverse(4, 0.5).unwrap();
        assert!((inv[(0, 0)] - 1.6).abs() < 1e-12 && (inv[(0, 1)] + 0.4).abs() < 1e-12);
        assert_eq!(symmetric_h_inverse(3, 0.0).unwrap(), DMatrix::identity(3, 3));
        assert!(symmetric_h_inverse(2, 0.5).is_err());
        assert!(matches!(symmetric_h_inverse(3, -0.5), Err(Error::SingularPayoff)));
    }
}
