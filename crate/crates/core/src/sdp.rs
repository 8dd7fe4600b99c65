//! The information-design semidefinite program
//!
//! ```text
//! maximise   F • X
//! subject to M_kl • X = cov(γ_k, γ_l)   for k ≤ l
//!            R_k  • X = 0               for every player k
//!            X ⪰ 0
//! ```
//!
//! solved by ADMM over the splitting `X = Z`, with `X` kept in the affine set
//! (cached least-squares projection) and `Z` in the PSD cone (eigenvalue
//! clipping). The scaled dual `U` of the splitting gives the cone multiplier
//! directly: after every cone step `-U` is the projection of `-(X + U)` onto
//! the cone, so the recovered `Γ` is PSD and orthogonal to `Z` by construction.
//! Equality multipliers are then the least-squares fit of the stationarity
//! condition `F + Σ λ_k R_k + Σ μ_kl M_kl + Γ = 0`.
//!
//! A singular prior covariance leaves no strictly feasible point, so the
//! iteration then runs on the face `X = T Y Tᵀ` spanned by the covariance
//! range and the result is lifted back.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::equilibrium::{full_info_solution, CovSolution};
use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::linalg;
use crate::objectives::{evaluate, full_info_value, FMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConstraintKind {
    /// Prior-covariance assignment for the state pair `(k, l)`, `k ≤ l`.
    M { k: usize, l: usize },
    /// Equilibrium (obedience) condition of player `k`.
    R { k: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub a: DMatrix<f64>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    pub n: usize,
    pub objective: FMatrix,
    /// All `M_kl` (row-major over `k ≤ l`) followed by `R_1 … R_n`.
    pub constraints: Vec<Constraint>,
    pub warm_start: Option<DMatrix<f64>>,
}

impl DesignProblem {
    pub fn m_count(&self) -> usize {
        self.constraints.iter().filter(|c| matches!(c.kind, ConstraintKind::M { .. })).count()
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn primal_residual(&self, x: &DMatrix<f64>) -> f64 {
        self.constraints
            .iter()
            .map(|c| (linalg::frobenius(&c.a, x) - c.rhs).abs())
            .fold(0.0, f64::max)
    }
}

pub fn m_matrix(n: usize, k: usize, l: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    if k == l {
        a[(n + k, n + k)] = 1.0;
    } else {
        a[(n + k, n + l)] = 0.5;
        a[(n + l, n + k)] = 0.5;
    }
    a
}

pub fn r_matrix(h: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = h.nrows();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    a[(k, k)] = h[(k, k)];
    for j in (0..n).filter(|&j| j != k) {
        a[(k, j)] = h[(k, j)] / 2.0;
        a[(j, k)] = h[(k, j)] / 2.0;
    }
    a[(k, n + k)] = -0.5;
    a[(n + k, k)] = -0.5;
    a
}

pub fn build_sdp(g: &GameSpec, f: &FMatrix) -> Result<DesignProblem> {
    g.check_dims()?;
    let n = g.n;
    if f.players() != n {
        return Err(Error::Dimension("objective and game disagree on player count".into()));
    }
    let mut constraints = Vec::with_capacity(n * (n + 1) / 2 + n);
    for k in 0..n {
        for l in k..n {
            constraints.push(Constraint {
                kind: ConstraintKind::M { k, l },
                a: m_matrix(n, k, l),
                rhs: g.sigma[(k, l)],
            });
        }
    }
    for k in 0..n {
        constraints.push(Constraint { kind: ConstraintKind::R { k }, a: r_matrix(&g.h, k), rhs: 0.0 });
    }
    let warm_start = full_info_solution(g).ok().map(|s| s.x);
    Ok(DesignProblem { n, objective: f.clone(), constraints, warm_start })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Initial ADMM penalty; adapted by residual balancing.
    pub rho: f64,
    /// Normalise the objective and each constraint row by its Frobenius norm.
    pub scale: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_iter: 50_000, rho: 1.0, scale: true }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::Parameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Parameter("max_iter must be positive".into()));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::Parameter(format!("rho must be positive, got {}", self.rho)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    Unbounded,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIter => "max_iter",
            Self::Unbounded => "unbounded",
            Self::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    #[serde(rename = "X", with = "crate::json::row_major")]
    pub x: DMatrix<f64>,
    pub objective: f64,
    /// Multipliers of the `M_kl` constraints, same order as the problem.
    pub mu_bar: Vec<f64>,
    /// Multipliers of the `R_k` constraints.
    pub lambda_bar: Vec<f64>,
    /// Cone multiplier `Γ̄ ⪰ 0`.
    #[serde(rename = "Gamma", with = "crate::json::row_major")]
    pub gamma: DMatrix<f64>,
    /// `-Σ μ̄_kl cov(γ_k, γ_l)`, an upper bound on the optimum.
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub comp_slack: f64,
    pub status: SolveStatus,
    pub iterations: usize,
}

impl SolveResult {
    pub fn multipliers(&self) -> Vec<f64> {
        self.mu_bar.iter().chain(self.lambda_bar.iter()).copied().collect()
    }

    pub fn as_cov_solution(&self, g: &GameSpec) -> Result<CovSolution> {
        Ok(CovSolution { x: self.x.clone(), mean_a: g.mean_actions()? })
    }
}

/// Scaled data of one ADMM run: constraint rows normalised to unit Frobenius
/// norm and the cached Gram pseudo-inverse of the row space.
struct Workspace {
    dim: usize,
    f: DMatrix<f64>,
    a: Vec<DMatrix<f64>>,
    b: Vec<f64>,
    rows: Vec<DMatrix<f64>>,
    row_scale: Vec<f64>,
    rhs: DVector<f64>,
    gram_pinv: DMatrix<f64>,
    f_scale: f64,
}

impl Workspace {
    fn new(f: DMatrix<f64>, a: Vec<DMatrix<f64>>, b: Vec<f64>, scale: bool) -> Self {
        let dim = f.nrows();
        let largest = a.iter().fold(0.0f64, |m, r| m.max(r.norm()));
        let row_scale: Vec<f64> = a
            .iter()
            .map(|r| {
                let nr = r.norm();
                if scale && nr > 1e-12 * largest { nr } else { 1.0 }
            })
            .collect();
        let rows: Vec<DMatrix<f64>> = a.iter().zip(&row_scale).map(|(r, s)| r / *s).collect();
        let rhs = DVector::from_iterator(rows.len(), b.iter().zip(&row_scale).map(|(v, s)| v / s));
        let m = rows.len();
        let gram = DMatrix::from_fn(m, m, |i, j| linalg::frobenius(&rows[i], &rows[j]));
        let gram_pinv = linalg::pinv_sym(&gram, 1e-13);
        let f_scale = if scale { f.norm().max(f64::MIN_POSITIVE) } else { 1.0 };
        Self { dim, f, a, b, rows, row_scale, rhs, gram_pinv, f_scale }
    }

    fn apply(&self, v: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(self.rows.len(), self.rows.iter().map(|a| linalg::frobenius(a, v)))
    }

    fn adjoint(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim;
        self.rows.iter().zip(y.iter()).fold(DMatrix::zeros(d, d), |acc, (a, w)| acc + a * *w)
    }

    fn project_affine(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        let r = self.apply(v) - &self.rhs;
        v - self.adjoint(&(&self.gram_pinv * r))
    }

    fn affine_feasible(&self) -> bool {
        let d = self.dim;
        let x = self.project_affine(&DMatrix::zeros(d, d));
        (self.apply(&x) - &self.rhs).amax() <= 1e-9 * (1.0 + self.rhs.amax())
    }

    fn primal_residual(&self, x: &DMatrix<f64>) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| (linalg::frobenius(a, x) - b).abs())
            .fold(0.0, f64::max)
    }

    /// Least-squares equality multipliers for a given cone multiplier, in the
    /// unscaled constraint basis.
    fn fit_multipliers(&self, gamma: &DMatrix<f64>) -> DVector<f64> {
        let target = &self.f + gamma;
        let y_scaled = -(&self.gram_pinv * self.apply(&target));
        DVector::from_iterator(
            y_scaled.len(),
            y_scaled.iter().zip(&self.row_scale).map(|(y, s)| y / s),
        )
    }

    fn assess(&self, z: &DMatrix<f64>, gamma: DMatrix<f64>) -> Kkt {
        let y = self.fit_multipliers(&gamma);
        let stat = self.a.iter().zip(y.iter()).fold(&self.f + &gamma, |acc, (a, w)| acc + a * *w);
        Kkt {
            stationarity: linalg::max_abs(&stat),
            primal: self.primal_residual(z),
            comp: linalg::frobenius(z, &gamma).abs(),
            pobj: linalg::frobenius(&self.f, z),
            dobj: -self.b.iter().zip(y.iter()).map(|(b, w)| w * b).sum::<f64>(),
            y,
            gamma,
        }
    }
}

struct Kkt {
    y: DVector<f64>,
    gamma: DMatrix<f64>,
    stationarity: f64,
    primal: f64,
    comp: f64,
    pobj: f64,
    dobj: f64,
}

fn stationarity_matrix(p: &DesignProblem, y: &[f64], gamma: &DMatrix<f64>) -> DMatrix<f64> {
    p.constraints
        .iter()
        .zip(y)
        .fold(&p.objective.f + gamma, |acc, (c, w)| acc + &c.a * *w)
}

struct Run {
    z: DMatrix<f64>,
    kkt: Kkt,
    status: SolveStatus,
    iterations: usize,
}

/// The minimal face of the cone holding every feasible point.
///
/// When the `M` constraints pin the state block to a singular covariance,
/// every feasible `X` has the form `T Y Tᵀ` with `T = diag(I, V)` and `V` an
/// orthonormal basis of the covariance range.
struct Face {
    t: DMatrix<f64>,
    /// Orthonormal basis of the discarded state directions.
    null: DMatrix<f64>,
}

fn state_block_face(p: &DesignProblem) -> Option<Face> {
    let n = p.n;
    let mut sigma = DMatrix::<f64>::zeros(n, n);
    let mut seen = DMatrix::from_element(n, n, false);
    for c in &p.constraints {
        if let ConstraintKind::M { k, l } = c.kind {
            if k >= n || l >= n || c.a != m_matrix(n, k, l) || seen[(k, l)] {
                continue;
            }
            seen[(k, l)] = true;
            seen[(l, k)] = true;
            sigma[(k, l)] = c.rhs;
            sigma[(l, k)] = c.rhs;
        }
    }
    if seen.iter().any(|s| !s) {
        return None;
    }
    let (vals, vecs) = linalg::sym_eigen(&sigma);
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = 1e-10 * top;
    let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > cut).collect();
    if keep.len() == n || vals.iter().any(|&v| v < -cut.max(1e-300)) {
        return None;
    }
    let drop: Vec<usize> = (0..n).filter(|&i| vals[i] <= cut).collect();
    let r = keep.len();
    let mut t = DMatrix::zeros(2 * n, n + r);
    t.view_mut((0, 0), (n, n)).fill_with_identity();
    for (c, &i) in keep.iter().enumerate() {
        t.view_mut((n, n + c), (n, 1)).copy_from(&vecs.column(i));
    }
    let mut null = DMatrix::zeros(n, drop.len());
    for (c, &i) in drop.iter().enumerate() {
        null.set_column(c, &vecs.column(i));
    }
    Some(Face { t, null })
}

pub fn solve(p: &DesignProblem, opts: &SolverOptions) -> Result<SolveResult> {
    opts.validate()?;
    let d = p.dim();
    if p.objective.f.shape() != (d, d) || p.constraints.iter().any(|c| c.a.shape() != (d, d)) {
        return Err(Error::Dimension("problem data must all be 2n x 2n".into()));
    }
    let b: Vec<f64> = p.constraints.iter().map(|c| c.rhs).collect();
    let face = state_block_face(p);
    let run = match &face {
        None => {
            let ws = Workspace::new(
                p.objective.f.clone(),
                p.constraints.iter().map(|c| c.a.clone()).collect(),
                b,
                opts.scale,
            );
            admm(&ws, p.warm_start.as_ref(), opts)
        }
        Some(face) => {
            let t = &face.t;
            let squeeze = |m: &DMatrix<f64>| linalg::symmetrize(&(t.transpose() * m * t));
            let ws = Workspace::new(
                squeeze(&p.objective.f),
                p.constraints.iter().map(|c| squeeze(&c.a)).collect(),
                b,
                opts.scale,
            );
            let warm = p.warm_start.as_ref().filter(|x| x.shape() == (d, d)).map(squeeze);
            admm(&ws, warm.as_ref(), opts)
        }
    };
    Ok(lift(p, face.as_ref(), run, opts.tol))
}

/// Maps a run on the reduced face back to the full problem, completing the
/// cone multiplier in the discarded directions through the `M` multipliers.
fn lift(p: &DesignProblem, face: Option<&Face>, run: Run, tol: f64) -> SolveResult {
    let Run { z, kkt, status, iterations } = run;
    let mut y: Vec<f64> = kkt.y.iter().copied().collect();
    let (x, gamma) = match face {
        None => (z, kkt.gamma),
        Some(face) => {
            let n = p.n;
            let t = &face.t;
            let x = linalg::symmetrize(&(t * &z * t.transpose()));
            let proj = t * t.transpose();
            let base = -linalg::symmetrize(&stationarity_matrix(p, &y, &DMatrix::zeros(2 * n, 2 * n)));
            let inner = &proj * &base * &proj;
            let lifted = linalg::symmetrize(&(t * &kkt.gamma * t.transpose())) + (&base - inner);
            let nn = &face.null * face.null.transpose();
            let mut q = DMatrix::zeros(2 * n, 2 * n);
            q.view_mut((n, n), (n, n)).copy_from(&nn);
            let floor = -0.5 * tol;
            let mut shift = 0.0;
            let mut gamma = lifted.clone();
            if linalg::min_eig(&gamma) < floor {
                shift = 1.0 + linalg::max_abs(&lifted);
                let cap = 1e12 * shift;
                loop {
                    gamma = &lifted + &q * shift;
                    if linalg::min_eig(&gamma) >= floor || shift >= cap {
                        break;
                    }
                    shift *= 2.0;
                }
            }
            let mut seen = vec![false; n * n];
            for (c, w) in p.constraints.iter().zip(y.iter_mut()) {
                if let ConstraintKind::M { k, l } = c.kind {
                    if c.a == m_matrix(n, k, l) && !seen[k * n + l] {
                        seen[k * n + l] = true;
                        let weight = if k == l { 1.0 } else { 2.0 };
                        *w -= shift * weight * nn[(k, l)];
                    }
                }
            }
            (x, gamma)
        }
    };
    let stationarity = linalg::max_abs(&stationarity_matrix(p, &y, &gamma));
    let mc = p.m_count();
    let objective = linalg::frobenius(&p.objective.f, &x);
    let dual_objective = -p.constraints.iter().zip(&y).map(|(c, w)| w * c.rhs).sum::<f64>();
    SolveResult {
        objective,
        mu_bar: y[..mc].to_vec(),
        lambda_bar: y[mc..].to_vec(),
        dual_objective,
        primal_residual: p.primal_residual(&x),
        dual_residual: stationarity,
        comp_slack: linalg::frobenius(&x, &gamma).abs(),
        gamma,
        status,
        iterations,
        x,
    }
}

fn admm(ws: &Workspace, warm: Option<&DMatrix<f64>>, opts: &SolverOptions) -> Run {
    let d = ws.dim;
    let tol = opts.tol;
    let b_max = ws.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let run = |z: DMatrix<f64>, kkt: Kkt, status: SolveStatus, iterations: usize| Run {
        z,
        kkt,
        status,
        iterations,
    };

    if !ws.affine_feasible() {
        let z = ws.project_affine(&DMatrix::zeros(d, d));
        let kkt = ws.assess(&z, DMatrix::zeros(d, d));
        return run(z, kkt, SolveStatus::Infeasible, 0);
    }

    // Scaled cost of the equivalent minimisation.
    let cost = -&ws.f / ws.f_scale;
    let runaway = 1e12 * (1.0 + ws.f.norm() * (1.0 + b_max));

    let mut z = match warm {
        Some(x0) if x0.shape() == (d, d) => linalg::project_psd(x0),
        _ => linalg::project_psd(&ws.project_affine(&DMatrix::zeros(d, d))),
    };
    let mut u = DMatrix::<f64>::zeros(d, d);
    let mut rho = opts.rho;
    let mut last = None;
    let mut anchor = z.clone();

    for it in 1..=opts.max_iter {
        let v = &z - &u - &cost / rho;
        let x = ws.project_affine(&v);
        let x_relaxed = &x * RELAXATION + &z * (1.0 - RELAXATION);
        let w = &x_relaxed + &u;
        let z_new = linalg::project_psd(&w);
        u = w - &z_new;
        let r_prim = (&x - &z_new).norm();
        let r_dual = rho * (&z_new - &z).norm();
        z = z_new;

        let pobj = linalg::frobenius(&ws.f, &z);
        if !pobj.is_finite() || pobj.abs() > runaway {
            let kkt = ws.assess(&z, DMatrix::zeros(d, d));
            return run(z, kkt, SolveStatus::Unbounded, it);
        }

        if it % 5 == 0 || it == opts.max_iter {
            let gamma = linalg::symmetrize(&(&u * (-rho * ws.f_scale)));
            let kkt = ws.assess(&z, gamma);
            let gap = (kkt.pobj - kkt.dobj).abs();
            let done = kkt.primal <= tol * (1.0 + b_max)
                && kkt.stationarity <= tol
                && kkt.comp <= tol
                && gap <= tol * (1.0 + kkt.pobj.abs() + kkt.dobj.abs());
            if done {
                return run(z, kkt, SolveStatus::Converged, it);
            }
            last = Some(kkt);
        }

        if it % RAY_WINDOW == 0 {
            if improving_ray(ws, &(&z - &anchor)) {
                let kkt = ws.assess(&z, DMatrix::zeros(d, d));
                return run(z, kkt, SolveStatus::Unbounded, it);
            }
            anchor = z.clone();
        }

        if it % 25 == 0 {
            if r_prim > 10.0 * r_dual {
                rho *= 2.0;
                u /= 2.0;
            } else if r_dual > 10.0 * r_prim {
                rho /= 2.0;
                u *= 2.0;
            }
        }
    }

    let kkt = last.unwrap_or_else(|| {
        let gamma = linalg::symmetrize(&(&u * (-rho * ws.f_scale)));
        ws.assess(&z, gamma)
    });
    run(z, kkt, SolveStatus::MaxIter, opts.max_iter)
}

const RAY_WINDOW: usize = 500;
const RELAXATION: f64 = 1.6;

/// A drift `δ` of the iterates that is PSD, keeps the constraints
/// (`A(δ) ≈ 0`) and strictly improves the objective certifies an unbounded
/// problem.
fn improving_ray(ws: &Workspace, delta: &DMatrix<f64>) -> bool {
    let size = delta.norm();
    if size <= 1e-12 {
        return false;
    }
    let dir = delta / size;
    let gain = linalg::frobenius(&ws.f, &dir) / ws.f.norm().max(f64::MIN_POSITIVE);
    gain > 1e-3 && ws.apply(&dir).amax() <= 1e-6 && linalg::min_eig(&dir) >= -1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// `‖F + Σ λ̄_k R_k + Σ μ̄_kl M_kl + Γ̄‖_∞`.
    pub stationarity: f64,
    /// `|X • Γ̄|`.
    pub complementarity: f64,
    /// Smallest eigenvalue of `Γ̄`; dual feasibility needs it `≥ 0`.
    pub dual_min_eig: f64,
    pub primal_residual: f64,
    pub primal_min_eig: f64,
    pub duality_gap: f64,
}

impl KktReport {
    pub fn worst(&self) -> f64 {
        self.stationarity
            .max(self.complementarity)
            .max((-self.dual_min_eig).max(0.0))
            .max(self.primal_residual)
    }
}

pub fn check_kkt(p: &DesignProblem, r: &SolveResult) -> Result<KktReport> {
    let d = p.dim();
    if r.x.shape() != (d, d) || r.gamma.shape() != (d, d) {
        return Err(Error::Dimension("result does not match problem size".into()));
    }
    let y = r.multipliers();
    if y.len() != p.constraints.len() {
        return Err(Error::Dimension("multiplier count does not match constraints".into()));
    }
    let stationarity = linalg::max_abs(&stationarity_matrix(p, &y, &r.gamma));
    let pobj = linalg::frobenius(&p.objective.f, &r.x);
    let dobj = -p.constraints.iter().zip(&y).map(|(c, w)| w * c.rhs).sum::<f64>();
    Ok(KktReport {
        stationarity,
        complementarity: linalg::frobenius(&r.x, &r.gamma).abs(),
        dual_min_eig: linalg::min_eig(&r.gamma),
        primal_residual: p.primal_residual(&r.x),
        primal_min_eig: linalg::min_eig(&r.x),
        duality_gap: (pobj - dobj).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub optimal: f64,
    pub full_info: f64,
    pub no_info: f64,
    pub pct_gap_full: f64,
    pub status: SolveStatus,
}

/// `100 (optimal - full) / |optimal|`, with both sides within `eps` of zero
/// read as `0/0 = 0`.
pub fn pct_gap(optimal: f64, full: f64, eps: f64) -> f64 {
    let num = optimal - full;
    if optimal.abs() <= eps {
        if num.abs() <= eps {
            0.0
        } else {
            f64::INFINITY.copysign(num)
        }
    } else {
        100.0 * num / optimal.abs()
    }
}

pub fn gap_vs_baselines(g: &GameSpec, f: &FMatrix, opts: &SolverOptions) -> Result<GapRecord> {
    let p = build_sdp(g, f)?;
    let r = solve(&p, opts)?;
    let full_info = full_info_value(f, g)?;
    let no_info = evaluate(f, &crate::equilibrium::no_info_solution(g)?)?;
    let eps = 10.0 * opts.tol * (1.0 + full_info.abs());
    Ok(GapRecord {
        optimal: r.objective,
        full_info,
        no_info,
        pct_gap_full: pct_gap(r.objective, full_info, eps),
        status: r.status,
    })
}
