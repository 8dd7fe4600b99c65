//! Designer objectives as `2n × 2n` coefficient matrices `F`, so that the
//! expected objective of an action/state law with covariance `X` is `F • X`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::equilibrium::CovSolution;
use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ObjectiveKind {
    Welfare,
    Conformism,
    Blended { lambda: f64 },
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FMatrix {
    #[serde(rename = "F", with = "crate::json::row_major")]
    pub f: DMatrix<f64>,
    pub label: ObjectiveKind,
}

impl FMatrix {
    pub fn players(&self) -> usize {
        self.f.nrows() / 2
    }

    fn quadrant(&self, r: usize, c: usize) -> DMatrix<f64> {
        let n = self.players();
        self.f.view((r * n, c * n), (n, n)).into_owned()
    }

    pub fn f11(&self) -> DMatrix<f64> {
        self.quadrant(0, 0)
    }

    pub fn f12(&self) -> DMatrix<f64> {
        self.quadrant(0, 1)
    }

    pub fn f21(&self) -> DMatrix<f64> {
        self.quadrant(1, 0)
    }

    pub fn f22(&self) -> DMatrix<f64> {
        self.quadrant(1, 1)
    }

    /// User-supplied coefficients; symmetrised on construction.
    pub fn custom(f: DMatrix<f64>) -> Result<Self> {
        if f.nrows() != f.ncols() || !f.nrows().is_multiple_of(2) || f.nrows() == 0 {
            return Err(Error::Dimension(format!("F must be 2n x 2n, got {:?}", f.shape())));
        }
        Ok(Self { f: linalg::symmetrize(&f), label: ObjectiveKind::Custom })
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.f22().amax() > 0.0 {
            out.push(
                "F22 is nonzero: the objective carries a constant F22 • Sigma that no design can change".into(),
            );
        }
        out
    }
}

fn check_game(g: &GameSpec) -> Result<()> {
    g.check_dims()
}

/// `F = [[-H, I], [I, O]]`, symmetrised (so `F11 = -(H + Hᵀ)/2`).
pub fn social_welfare_f(g: &GameSpec) -> Result<FMatrix> {
    check_game(g)?;
    let n = g.n;
    let mut f = DMatrix::zeros(2 * n, 2 * n);
    f.view_mut((0, 0), (n, n)).copy_from(&(-&g.h));
    for i in 0..n {
        f[(i, n + i)] = 1.0;
        f[(n + i, i)] = 1.0;
    }
    Ok(FMatrix { f: linalg::symmetrize(&f), label: ObjectiveKind::Welfare })
}

/// Negative sum of squared deviations from the mean action.
pub fn conformism_f(n: usize) -> Result<FMatrix> {
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 players, got {n}")));
    }
    let nf = n as f64;
    let mut f = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            f[(i, j)] = if i == j { (1.0 - nf) / nf } else { 1.0 / nf };
        }
    }
    Ok(FMatrix { f, label: ObjectiveKind::Conformism })
}

/// `(1 - λ) F_welfare + λ F_conformism`.
pub fn blended_f(g: &GameSpec, lambda: f64) -> Result<FMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Parameter(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    let welfare = social_welfare_f(g)?;
    let conformism = conformism_f(g.n)?;
    let f = welfare.f * (1.0 - lambda) + conformism.f * lambda;
    Ok(FMatrix { f, label: ObjectiveKind::Blended { lambda } })
}

pub fn evaluate(f: &FMatrix, x: &CovSolution) -> Result<f64> {
    if f.f.shape() != x.x.shape() {
        return Err(Error::Dimension(format!(
            "F is {:?} but X is {:?}",
            f.f.shape(),
            x.x.shape()
        )));
    }
    Ok(linalg::frobenius(&f.f, &x.x))
}

/// `F_H = H⁻ᵀ (F11 + F12 H + Hᵀ F21) H⁻¹`.
pub fn full_info_matrix(f: &FMatrix, g: &GameSpec) -> Result<DMatrix<f64>> {
    check_game(g)?;
    if f.players() != g.n {
        return Err(Error::Dimension("objective and game disagree on player count".into()));
    }
    let hinv = g.h_inverse()?;
    let inner = f.f11() + f.f12() * &g.h + g.h.transpose() * f.f21();
    Ok(hinv.transpose() * inner * hinv)
}

/// Objective of full disclosure, `F_H • Sigma` (plus `F22 • Sigma` when a
/// custom objective carries a constant block).
pub fn full_info_value(f: &FMatrix, g: &GameSpec) -> Result<f64> {
    let fh = full_info_matrix(f, g)?;
    Ok(linalg::frobenius(&fh, &g.sigma) + linalg::frobenius(&f.f22(), &g.sigma))
}

/// `E_ij = F_ij + F_{i,n+i} H_ij + F_{j,n+j} H_ji`, valid when `F12` is
/// diagonal and `F22 = O`. On equilibrium covariances `F • X = E • var(a)`.
pub fn action_space_reduction(f: &FMatrix, g: &GameSpec) -> Result<DMatrix<f64>> {
    check_game(g)?;
    let n = g.n;
    if f.players() != n {
        return Err(Error::Dimension("objective and game disagree on player count".into()));
    }
    let scale = linalg::max_abs(&f.f).max(1.0);
    let f12 = f.f12();
    let off_diag = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .fold(0.0f64, |acc, (i, j)| acc.max(f12[(i, j)].abs()));
    if off_diag > 1e-12 * scale {
        return Err(Error::ReductionInapplicable("F12 is not diagonal".into()));
    }
    if f.f22().amax() > 1e-12 * scale {
        return Err(Error::ReductionInapplicable("F22 is not zero".into()));
    }
    let f11 = f.f11();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        f11[(i, j)] + f12[(i, i)] * g.h[(i, j)] + f12[(j, j)] * g.h[(j, i)]
    }))
}

/// Objective file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ObjectiveSpec {
    Welfare,
    Conformism,
    Blended {
        lambda: f64,
    },
    Custom {
        #[serde(rename = "F", with = "crate::json::row_major")]
        f: DMatrix<f64>,
    },
}

impl ObjectiveSpec {
    pub fn build(&self, g: &GameSpec) -> Result<FMatrix> {
        let f = match self {
            Self::Welfare => social_welfare_f(g)?,
            Self::Conformism => conformism_f(g.n)?,
            Self::Blended { lambda } => blended_f(g, *lambda)?,
            Self::Custom { f } => FMatrix::custom(f.clone())?,
        };
        if f.players() != g.n {
            return Err(Error::Dimension("objective and game disagree on player count".into()));
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{full_info_solution, no_info_solution};
    use crate::game::{asymmetric_game, symmetric_game};
    use nalgebra::DVector;

    fn sym(n: usize, h: f64) -> GameSpec {
        symmetric_game(n, h, DMatrix::identity(n, n)).unwrap()
    }

    #[test]
    fn welfare_blocks() {
        let f = social_welfare_f(&sym(2, 0.5)).unwrap();
        assert_eq!(f.f11(), DMatrix::from_row_slice(2, 2, &[-1.0, -0.5, -0.5, -1.0]));
        assert_eq!(f.f12(), DMatrix::identity(2, 2));
        assert_eq!(f.f22(), DMatrix::zeros(2, 2));
        assert_eq!(social_welfare_f(&sym(3, 0.0)).unwrap().f11(), -DMatrix::identity(3, 3));
    }

    #[test]
    fn welfare_symmetrises_asymmetric_h() {
        let g = asymmetric_game(3, 1.0, 5, DMatrix::identity(3, 3)).unwrap();
        let f = social_welfare_f(&g).unwrap();
        assert!((f.f11() + (&g.h + g.h.transpose()) * 0.5).amax() < 1e-15);
    }

    #[test]
    fn conformism_structure() {
        let f = conformism_f(2).unwrap();
        assert_eq!(f.f11(), DMatrix::from_row_slice(2, 2, &[-0.5, 0.5, 0.5, -0.5]));
        let f = conformism_f(3).unwrap();
        let eig = linalg::sym_eigenvalues(&f.f);
        let expected = [-1.0, -1.0, 0.0, 0.0, 0.0, 0.0];
        for (a, b) in eig.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{eig:?}");
        }
        let rows = f.f11() * DVector::from_element(3, 1.0);
        assert!(rows.amax() < 1e-15);
        assert!(conformism_f(1).is_err());
    }

    #[test]
    fn blended_endpoints_and_interior() {
        let g = sym(4, 0.5);
        assert_eq!(blended_f(&g, 0.0).unwrap().f, social_welfare_f(&g).unwrap().f);
        assert_eq!(blended_f(&g, 1.0).unwrap().f, conformism_f(4).unwrap().f);
        let y = blended_f(&g, 0.2).unwrap().f11();
        assert!((y[(0, 0)] + 0.95).abs() < 1e-12);
        assert!((y[(0, 1)] + 0.35).abs() < 1e-12);
        assert!(blended_f(&g, 1.2).is_err());
        assert!(blended_f(&g, -0.1).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let f = FMatrix::custom(DMatrix::identity(4, 4)).unwrap();
        let x = CovSolution { x: DMatrix::identity(4, 4), mean_a: DVector::zeros(2) };
        assert_eq!(evaluate(&f, &x).unwrap(), 4.0);
        let g = sym(2, 0.5);
        let no = no_info_solution(&g).unwrap();
        assert_eq!(evaluate(&social_welfare_f(&g).unwrap(), &no).unwrap(), 0.0);
        assert!(evaluate(&f, &CovSolution { x: DMatrix::identity(6, 6), mean_a: DVector::zeros(3) }).is_err());
    }

    #[test]
    fn full_info_value_common_state() {
        let g = symmetric_game(2, 0.5, DMatrix::from_element(2, 2, 1.0)).unwrap();
        let f = social_welfare_f(&g).unwrap();
        let v = full_info_value(&f, &g).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-12);
        let direct = evaluate(&f, &full_info_solution(&g).unwrap()).unwrap();
        assert!((v - direct).abs() < 1e-12);
        let fh = full_info_matrix(&f, &g).unwrap();
        assert!((fh - g.h_inverse().unwrap()).amax() < 1e-12);

        let c = conformism_f(2).unwrap();
        assert!(full_info_value(&c, &g).unwrap().abs() < 1e-12);
    }

    #[test]
    fn reduction_examples() {
        let g = sym(4, 0.3);
        let e = action_space_reduction(&social_welfare_f(&g).unwrap(), &g).unwrap();
        assert!((e - &g.h).amax() < 1e-15);

        let (lambda, h, n) = (0.3, 0.3, 4.0);
        let e = action_space_reduction(&blended_f(&g, lambda).unwrap(), &g).unwrap();
        assert!((e[(0, 0)] - (lambda * (1.0 - n) / n + 1.0 - lambda)).abs() < 1e-12);
        assert!((e[(0, 1)] - (lambda / n + (1.0 - lambda) * h)).abs() < 1e-12);

        let c = conformism_f(4).unwrap();
        assert_eq!(action_space_reduction(&c, &g).unwrap(), c.f11());

        let mut bad = social_welfare_f(&g).unwrap();
        bad.f[(0, 5)] = 0.3;
        bad.f[(5, 0)] = 0.3;
        assert!(matches!(action_space_reduction(&bad, &g), Err(Error::ReductionInapplicable(_))));
    }

    #[test]
    fn objective_schema() {
        let g = sym(3, 0.2);
        let spec: ObjectiveSpec = serde_json::from_str(r#"{"type":"blended","lambda":0.25}"#).unwrap();
        assert_eq!(spec.build(&g).unwrap().label, ObjectiveKind::Blended { lambda: 0.25 });
        let spec: ObjectiveSpec = serde_json::from_str(r#"{"type":"welfare"}"#).unwrap();
        assert_eq!(spec.build(&g).unwrap().label, ObjectiveKind::Welfare);
        let spec: ObjectiveSpec =
            serde_json::from_str(r#"{"type":"custom","F":[[0,1],[0,0]]}"#).unwrap();
        let mut g1 = sym(2, 0.0);
        g1.n = 1;
        g1.h = DMatrix::identity(1, 1);
        g1.mu = DVector::zeros(1);
        g1.sigma = DMatrix::identity(1, 1);
        let f = spec.build(&g1).unwrap();
        assert_eq!(f.f[(0, 1)], 0.5);
        assert!(f.warnings().is_empty());
        assert!(serde_json::from_str::<ObjectiveSpec>(r#"{"type":"entropy"}"#).is_err());
    }
}
