//! Dense primal-dual interior-point solver for small SDPs of the form
//!
//! ```text
//! maximize    tr(C X)
//! subject to  tr(A_i X) <= b_i,   i = 1..k
//!             X >= 0 (positive semidefinite)
//! ```
//!
//! Each inequality gets a slack `s_i >= 0`, so the cone is `S^n_+ x R^k_+`.
//! The dual is `minimize b^T y  s.t.  Z = sum_i y_i A_i - C >= 0, y >= 0`.
//! Iterates follow the HKM search direction with a Mehrotra
//! predictor-corrector and an infeasible start. With `k` this small the
//! Schur complement is a `k x k` system.
//!
//! If progress stalls, the problem is re-solved once after a congruence
//! built from the stalled dual slack, which evens out its spectrum.
//!
//! Interior-point methods converge to the analytic center of the optimal
//! face. When the optimum is not unique (for instance when the problem is a
//! real embedding of a complex one, which makes it invariant under rotation
//! by `j`) that center has higher rank than necessary. An optional
//! rank-reduction pass then moves along the optimal face, keeping every
//! `tr(A_i X)` fixed, until the rank satisfies `r(r+1)/2 <= k`.

use nalgebra::{Cholesky, DMatrix};

use crate::numerics::{sym_eig_desc, RMat};
use crate::{Error, Result};

pub const MAX_DIM: usize = 64;
pub const MAX_CONSTRAINTS: usize = 3;

const SYMMETRY_TOL: f64 = 1e-10;
const RANK_TOL: f64 = 1e-7;
const INFEASIBLE_Y: f64 = 1e10;
const STALL_WINDOW: usize = 10;

#[derive(Debug, Clone)]
pub struct SdpProblem {
    c: RMat,
    constraints: Vec<(RMat, f64)>,
}

impl SdpProblem {
    pub fn new(c: RMat, constraints: Vec<(RMat, f64)>) -> Result<Self> {
        let n = c.nrows();
        if n == 0 || c.ncols() != n {
            return Err(Error::Dimension(format!(
                "objective must be square, got {:?}",
                c.shape()
            )));
        }
        if n > MAX_DIM {
            return Err(Error::InvalidInput(format!(
                "dimension {n} exceeds {MAX_DIM}"
            )));
        }
        if constraints.is_empty() || constraints.len() > MAX_CONSTRAINTS {
            return Err(Error::InvalidInput(format!(
                "expected 1..={MAX_CONSTRAINTS} constraints, got {}",
                constraints.len()
            )));
        }
        check_symmetric(&c, "objective")?;
        for (i, (a, b)) in constraints.iter().enumerate() {
            if a.shape() != (n, n) {
                return Err(Error::Dimension(format!(
                    "constraint {i} is {:?}, expected {n}x{n}",
                    a.shape()
                )));
            }
            check_symmetric(a, &format!("constraint {i}"))?;
            if !b.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "constraint {i} has non-finite bound"
                )));
            }
        }
        Ok(Self { c, constraints })
    }

    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn objective(&self) -> &RMat {
        &self.c
    }

    pub fn constraints(&self) -> &[(RMat, f64)] {
        &self.constraints
    }
}

fn check_symmetric(m: &RMat, what: &str) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{what} has non-finite entries"
        )));
    }
    let scale = m.amax();
    let asymmetry = (m - m.transpose()).amax();
    if asymmetry > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { asymmetry, scale });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone, Copy)]
pub struct SdpSettings {
    /// Relative duality-gap target.
    pub gap_tol: f64,
    /// Relative primal/dual residual target.
    pub feas_tol: f64,
    pub max_iter: usize,
    /// Run the rank-reduction pass on optimal solutions.
    pub reduce_rank: bool,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self {
            gap_tol: 1e-9,
            feas_tol: 1e-10,
            max_iter: 200,
            reduce_rank: true,
        }
    }
}

/// Per-iterate record, in the solver's internally scaled units.
#[derive(Debug, Clone, Copy)]
pub struct IterInfo {
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub rel_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: RMat,
    /// Dual multipliers, one per constraint.
    pub y: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Relative duality gap `|b^T y - tr(C X)| / (1 + |.| + |.|)` in scaled units.
    pub duality_gap: f64,
    /// Largest constraint violation `max(0, tr(A_i X) - b_i)` with each
    /// constraint scaled to a unit-Frobenius `A_i`.
    pub max_violation: f64,
    pub iterations: usize,
    pub status: SdpStatus,
    pub history: Vec<IterInfo>,
}

/// Problem rescaled to unit-norm data and `O(1)` bounds.
struct Scaled {
    n: usize,
    c: RMat,
    a: Vec<RMat>,
    b: Vec<f64>,
    c_scale: f64,
    a_scale: Vec<f64>,
    x_scale: f64,
}

impl Scaled {
    fn new(p: &SdpProblem) -> Self {
        let n = p.dim();
        let c_norm = p.c.norm();
        let c_scale = if c_norm > 0.0 { c_norm } else { 1.0 };
        let a_scale: Vec<f64> = p
            .constraints
            .iter()
            .map(|(a, _)| {
                let s = a.norm();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        let rel_b: Vec<f64> = p
            .constraints
            .iter()
            .zip(&a_scale)
            .map(|((_, b), s)| b / s)
            .collect();
        let bmax = rel_b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let x_scale = if bmax > 0.0 { bmax } else { 1.0 };
        Self {
            n,
            c: &p.c / c_scale,
            a: p.constraints
                .iter()
                .zip(&a_scale)
                .map(|((a, _), s)| a / *s)
                .collect(),
            b: rel_b.iter().map(|b| b / x_scale).collect(),
            c_scale,
            a_scale,
            x_scale,
        }
    }

    fn k(&self) -> usize {
        self.a.len()
    }
}

fn sym(m: &RMat) -> RMat {
    (m + m.transpose()) * 0.5
}

fn inner(a: &RMat, b: &RMat) -> f64 {
    a.dot(b)
}

/// Largest `t` (capped at `cap`) with `X + t dX` positive semidefinite.
fn max_psd_step(x: &RMat, dx: &RMat, cap: f64) -> f64 {
    let Some(chol) = Cholesky::new(x.clone()) else {
        return 0.0;
    };
    let l = chol.l();
    let n = x.nrows();
    let linv = l
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .expect("triangular");
    let m = sym(&(&linv * dx * linv.transpose()));
    let lam_min = match sym_eig_desc(&m) {
        Ok(e) => *e.values.last().expect("non-empty"),
        Err(_) => return 0.0,
    };
    if lam_min >= 0.0 {
        cap
    } else {
        cap.min(-1.0 / lam_min)
    }
}

fn max_lp_step(v: &[f64], dv: &[f64], cap: f64) -> f64 {
    v.iter()
        .zip(dv)
        .filter(|(_, d)| **d < 0.0)
        .fold(cap, |t, (x, d)| t.min(-x / d))
}

struct Direction {
    dx: RMat,
    ds: Vec<f64>,
    dy: Vec<f64>,
    dz: RMat,
}

struct Iterate {
    x: RMat,
    s: Vec<f64>,
    y: Vec<f64>,
    z: RMat,
}

struct Newton<'a> {
    p: &'a Scaled,
    zinv: RMat,
    schur: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    rp: Vec<f64>,
    rd: RMat,
}

impl<'a> Newton<'a> {
    fn new(p: &'a Scaled, it: &Iterate, rp: Vec<f64>, rd: RMat) -> Option<Self> {
        let k = p.k();
        let zinv = Cholesky::new(it.z.clone())?.inverse();
        let xaz: Vec<RMat> = p.a.iter().map(|a| &it.x * a * &zinv).collect();
        let mut m = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = inner(&p.a[i], &xaz[j].transpose());
            }
            m[(i, i)] += it.s[i] / it.y[i];
        }
        let m = sym(&m);
        Some(Self {
            p,
            zinv,
            schur: m.lu(),
            rp,
            rd,
        })
    }

    /// Solve the linearized system with complementarity right-hand sides
    /// `X dZ + dX Z = rc_mat` and `y ds + s dy = rc_vec`.
    fn solve(&self, it: &Iterate, rc_mat: &RMat, rc_vec: &[f64]) -> Option<Direction> {
        let p = self.p;
        let k = p.k();
        let base = (rc_mat - &it.x * &self.rd) * &self.zinv;
        let rhs = nalgebra::DVector::from_fn(k, |i, _| {
            inner(&p.a[i], &base.transpose()) + rc_vec[i] / it.y[i] - self.rp[i]
        });
        let dy = self.schur.solve(&rhs)?;
        let mut dz = self.rd.clone();
        for (a, d) in p.a.iter().zip(dy.iter()) {
            dz += a * *d;
        }
        let dx = sym(&((rc_mat - &it.x * &dz) * &self.zinv));
        let ds = (0..k)
            .map(|i| (rc_vec[i] - it.s[i] * dy[i]) / it.y[i])
            .collect();
        Some(Direction {
            dx,
            ds,
            dy: dy.iter().copied().collect(),
            dz,
        })
    }
}

pub fn solve_sdp(problem: &SdpProblem, settings: &SdpSettings) -> Result<SdpSolution> {
    if !(settings.gap_tol > 0.0) {
        return Err(Error::InvalidInput("gap_tol must be > 0".into()));
    }
    let p = Scaled::new(problem);

    // A zero constraint matrix with a negative bound can never be met.
    for (i, (a, b)) in problem.constraints.iter().enumerate() {
        if a.norm() == 0.0 && *b < 0.0 {
            log::debug!("constraint {i} is 0 <= {b}: infeasible");
            return Ok(finish(
                problem,
                &p,
                &initial_iterate(&p),
                0,
                SdpStatus::Infeasible,
                Vec::new(),
            ));
        }
    }

    let mut run = iterate(&p, settings, settings.max_iter)?;
    if run.status == Pass::Stalled {
        let used = run.history.len();
        if let Some(sol) = resolve_preconditioned(
            problem,
            &run.it.z,
            settings,
            settings.max_iter.saturating_sub(used),
        )? {
            let mut history = run.history;
            history.extend(sol.history.iter().copied());
            return Ok(SdpSolution {
                iterations: history.len(),
                history,
                ..sol
            });
        }
    }
    if run.status == Pass::Optimal && settings.reduce_rank {
        run.it.x = reduce_rank(&p, &run.it.x)?;
    }
    let status = match run.status {
        Pass::Optimal => SdpStatus::Optimal,
        Pass::Infeasible => SdpStatus::Infeasible,
        _ if has_farkas_certificate(&p, &run.it.y) => SdpStatus::Infeasible,
        _ => SdpStatus::MaxIter,
    };
    let iters = run.history.len();
    Ok(finish(problem, &p, &run.it, iters, status, run.history))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pass {
    Optimal,
    Infeasible,
    Stalled,
    Exhausted,
}

struct Run {
    it: Iterate,
    status: Pass,
    history: Vec<IterInfo>,
}

fn iterate(p: &Scaled, settings: &SdpSettings, max_iter: usize) -> Result<Run> {
    let n = p.n;
    let k = p.k();
    let mut it = initial_iterate(p);
    let mut history: Vec<IterInfo> = Vec::new();
    let nk = (n + k) as f64;

    for iter in 0..max_iter {
        let rp: Vec<f64> = (0..k)
            .map(|i| p.b[i] - inner(&p.a[i], &it.x) - it.s[i])
            .collect();
        let mut rd = -&p.c - &it.z;
        for (a, y) in p.a.iter().zip(&it.y) {
            rd += a * *y;
        }
        let compl = inner(&it.x, &it.z) + dot(&it.s, &it.y);
        let mu = compl / nk;
        let pobj = inner(&p.c, &it.x);
        let dobj = dot(&p.b, &it.y);
        let info = IterInfo {
            primal_objective: pobj,
            dual_objective: dobj,
            rel_gap: compl.abs().max((dobj - pobj).abs()) / (1.0 + pobj.abs() + dobj.abs()),
            primal_infeasibility: norm(&rp) / (1.0 + norm(&p.b)),
            dual_infeasibility: rd.norm() / (1.0 + p.c.norm()),
        };
        history.push(info);

        if info.rel_gap <= settings.gap_tol
            && info.primal_infeasibility <= settings.feas_tol
            && info.dual_infeasibility <= settings.feas_tol
        {
            return Ok(Run {
                it,
                status: Pass::Optimal,
                history,
            });
        }

        if iter >= STALL_WINDOW {
            let before = history[iter - STALL_WINDOW];
            if info.rel_gap > 0.5 * before.rel_gap
                && info.primal_infeasibility > 0.5 * before.primal_infeasibility
            {
                log::debug!("SDP iteration {iter}: no progress over {STALL_WINDOW} iterations");
                return Ok(Run {
                    it,
                    status: Pass::Stalled,
                    history,
                });
            }
        }

        if it.y.iter().fold(0.0f64, |m, v| m.max(v.abs())) > INFEASIBLE_Y
            && has_farkas_certificate(p, &it.y)
        {
            return Ok(Run {
                it,
                status: Pass::Infeasible,
                history,
            });
        }

        let Some(newton) = Newton::new(p, &it, rp, rd) else {
            log::warn!("SDP iteration {iter}: dual slack lost definiteness");
            break;
        };

        // predictor
        let xz = &it.x * &it.z;
        let sy: Vec<f64> = it.s.iter().zip(&it.y).map(|(s, y)| s * y).collect();
        let Some(aff) = newton.solve(&it, &(-&xz), &sy.iter().map(|v| -v).collect::<Vec<_>>())
        else {
            break;
        };
        let ap = max_psd_step(&it.x, &aff.dx, 1.0).min(max_lp_step(&it.s, &aff.ds, 1.0));
        let ad = max_psd_step(&it.z, &aff.dz, 1.0).min(max_lp_step(&it.y, &aff.dy, 1.0));
        let x_aff = &it.x + &aff.dx * ap;
        let z_aff = &it.z + &aff.dz * ad;
        let s_aff: Vec<f64> = it.s.iter().zip(&aff.ds).map(|(s, d)| s + ap * d).collect();
        let y_aff: Vec<f64> = it.y.iter().zip(&aff.dy).map(|(y, d)| y + ad * d).collect();
        let mu_aff = (inner(&x_aff, &z_aff) + dot(&s_aff, &y_aff)) / nk;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let rc_mat = RMat::identity(n, n) * (sigma * mu) - &xz - &aff.dx * &aff.dz;
        let rc_vec: Vec<f64> = (0..k)
            .map(|i| sigma * mu - sy[i] - aff.ds[i] * aff.dy[i])
            .collect();
        let Some(dir) = newton.solve(&it, &rc_mat, &rc_vec) else {
            break;
        };
        let tau = if mu < 1e-6 { 0.995 } else { 0.98 };
        let ap = tau
            * max_psd_step(&it.x, &dir.dx, 1.0 / tau).min(max_lp_step(&it.s, &dir.ds, 1.0 / tau));
        let ad = tau
            * max_psd_step(&it.z, &dir.dz, 1.0 / tau).min(max_lp_step(&it.y, &dir.dy, 1.0 / tau));
        if ap <= 0.0 && ad <= 0.0 {
            log::warn!("SDP iteration {iter}: zero step");
            break;
        }
        it.x = sym(&(&it.x + &dir.dx * ap));
        it.z = sym(&(&it.z + &dir.dz * ad));
        for i in 0..k {
            it.s[i] += ap * dir.ds[i];
            it.y[i] += ad * dir.dy[i];
        }
    }

    Ok(Run {
        it,
        status: Pass::Exhausted,
        history,
    })
}

/// Re-solve after the congruence `X = T X' T^T` with `T = V diag(max(z_i, 1))^{-1/2}`
/// built from the dual slack `Z = V diag(z) V^T` of a stalled pass. Large
/// dual eigenvalues squeeze the primal iterate into a sliver that rounding
/// cannot resolve; after the congruence the dual slack is `O(1)` there.
fn resolve_preconditioned(
    problem: &SdpProblem,
    z_scaled: &RMat,
    settings: &SdpSettings,
    max_iter: usize,
) -> Result<Option<SdpSolution>> {
    if max_iter == 0 {
        return Ok(None);
    }
    let e = sym_eig_desc(z_scaled)?;
    if !(e.values[0] > 1.0) {
        return Ok(None);
    }
    let n = problem.dim();
    let t = RMat::from_fn(n, n, |i, j| e.vectors[(i, j)] / e.values[j].max(1.0).sqrt());
    let congruent = |m: &RMat| sym(&(t.transpose() * m * &t));
    let inner_problem = SdpProblem {
        c: congruent(&problem.c),
        constraints: problem
            .constraints
            .iter()
            .map(|(a, b)| (congruent(a), *b))
            .collect(),
    };
    let inner_settings = SdpSettings {
        max_iter,
        ..*settings
    };
    let p = Scaled::new(&inner_problem);
    let mut run = iterate(&p, &inner_settings, max_iter)?;
    if run.status != Pass::Optimal {
        return Ok(None);
    }
    if settings.reduce_rank {
        run.it.x = reduce_rank(&p, &run.it.x)?;
    }
    let iters = run.history.len();
    let mut sol = finish(
        &inner_problem,
        &p,
        &run.it,
        iters,
        SdpStatus::Optimal,
        run.history,
    );
    sol.x = sym(&(&t * &sol.x * t.transpose()));
    sol.primal_objective = inner(&problem.c, &sol.x);
    sol.max_violation = problem
        .constraints
        .iter()
        .map(|(a, b)| {
            let s = a.norm();
            let s = if s > 0.0 { s } else { 1.0 };
            ((inner(a, &sol.x) - b) / s).max(0.0)
        })
        .fold(0.0, f64::max);
    Ok(Some(sol))
}

fn initial_iterate(p: &Scaled) -> Iterate {
    let n = p.n;
    let k = p.k();
    // X0 = theta I with theta the tightest per-constraint trace bound.
    let theta =
        p.a.iter()
            .zip(&p.b)
            .filter(|(a, b)| a.trace() > 0.0 && **b > 0.0)
            .map(|(a, b)| b / a.trace())
            .fold(f64::INFINITY, f64::min);
    let theta = if theta.is_finite() { theta } else { 1.0 };
    Iterate {
        x: RMat::identity(n, n) * theta,
        s: vec![1.0; k],
        y: vec![1.0; k],
        z: RMat::identity(n, n) * (1.0 + p.c.norm()),
    }
}

/// `y >= 0`, `sum y_i A_i >= 0` and `b^T y < 0` proves the primal empty.
fn has_farkas_certificate(p: &Scaled, y: &[f64]) -> bool {
    let ny = norm(y);
    if !(ny > 0.0) || y.iter().any(|v| *v < 0.0) {
        return false;
    }
    let yh: Vec<f64> = y.iter().map(|v| v / ny).collect();
    let by = dot(&p.b, &yh);
    if by >= -1e-8 {
        return false;
    }
    let mut s = RMat::zeros(p.n, p.n);
    for (a, v) in p.a.iter().zip(&yh) {
        s += a * *v;
    }
    match sym_eig_desc(&sym(&s)) {
        Ok(e) => *e.values.last().expect("non-empty") >= -1e-8 * by.abs(),
        Err(_) => false,
    }
}

/// Move along the optimal face until `r(r+1)/2` no longer exceeds the
/// number of linear conditions that must be preserved.
fn reduce_rank(p: &Scaled, x: &RMat) -> Result<RMat> {
    let mut x = x.clone();
    for _ in 0..p.n {
        let e = sym_eig_desc(&x)?;
        let lam1 = e.values[0];
        if !(lam1 > 0.0) {
            break;
        }
        let r = e
            .values
            .iter()
            .take_while(|&&l| l > RANK_TOL * lam1)
            .count();
        let d = r * (r + 1) / 2;
        let mut forms: Vec<&RMat> = p.a.iter().collect();
        // the objective is preserved automatically at an optimum; pin it too when there is room
        if d >= forms.len() + 2 {
            forms.push(&p.c);
        }
        if d <= forms.len() {
            break;
        }

        let v = RMat::from_fn(p.n, r, |i, j| e.vectors[(i, j)] * e.values[j].sqrt());
        let basis: Vec<(usize, usize)> = (0..r)
            .flat_map(|q| (0..=q).map(move |pp| (pp, q)))
            .take(forms.len() + 1)
            .collect();
        let mut kmat = DMatrix::<f64>::zeros(forms.len(), basis.len());
        for (row, f) in forms.iter().enumerate() {
            let proj = v.transpose() * *f * &v;
            for (col, &(a, b)) in basis.iter().enumerate() {
                kmat[(row, col)] = if a == b {
                    proj[(a, b)]
                } else {
                    2.0 * proj[(a, b)]
                };
            }
            let rn = kmat.row(row).norm();
            if rn > 0.0 {
                kmat.row_mut(row).scale_mut(1.0 / rn);
            }
        }
        let null = sym_eig_desc(&sym(&kmat.tr_mul(&kmat)))?;
        let w_coef = null.vectors.column(basis.len() - 1);
        let mut w = RMat::zeros(r, r);
        for (&(a, b), c) in basis.iter().zip(w_coef.iter()) {
            w[(a, b)] += c;
            if a != b {
                w[(b, a)] += c;
            }
        }
        let we = sym_eig_desc(&w)?;
        let (hi, lo) = (we.values[0], *we.values.last().expect("non-empty"));
        let (w, top) = if hi >= -lo { (w, hi) } else { (-w, -lo) };
        if !(top > 0.0) {
            break;
        }
        let step = &v * (w * (-1.0 / top)) * v.transpose();
        x = sym(&(x + step));
    }
    Ok(x)
}

fn finish(
    problem: &SdpProblem,
    p: &Scaled,
    it: &Iterate,
    iterations: usize,
    status: SdpStatus,
    history: Vec<IterInfo>,
) -> SdpSolution {
    let pobj_s = inner(&p.c, &it.x);
    let dobj_s = dot(&p.b, &it.y);
    let max_violation =
        p.a.iter()
            .zip(&p.b)
            .map(|(a, b)| (inner(a, &it.x) - b).max(0.0) * p.x_scale)
            .fold(0.0, f64::max);
    let x = &it.x * p.x_scale;
    SdpSolution {
        primal_objective: inner(&problem.c, &x),
        dual_objective: dobj_s * p.c_scale * p.x_scale,
        y: it
            .y
            .iter()
            .zip(&p.a_scale)
            .map(|(y, s)| y * p.c_scale / s)
            .collect(),
        duality_gap: (dobj_s - pobj_s).abs() / (1.0 + pobj_s.abs() + dobj_s.abs()),
        max_violation,
        x,
        iterations,
        status,
        history,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn solve(p: &SdpProblem) -> SdpSolution {
        solve_sdp(p, &SdpSettings::default()).unwrap()
    }

    #[test]
    fn mass_goes_to_largest_objective_direction() {
        let c = RMat::from_diagonal(&dvector![1.0, 0.0]);
        let p = SdpProblem::new(c, vec![(RMat::identity(2, 2), 1.0)]).unwrap();
        let s = solve(&p);
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.primal_objective - 1.0).abs() < 1e-8);
        assert!((&s.x - RMat::from_diagonal(&dvector![1.0, 0.0])).amax() < 1e-8);
    }

    #[test]
    fn identity_objective_uses_full_trace() {
        let p = SdpProblem::new(RMat::identity(4, 4), vec![(RMat::identity(4, 4), 2.5)]).unwrap();
        let s = solve(&p);
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.primal_objective - 2.5).abs() < 1e-8);
        assert!((s.x.trace() - 2.5).abs() < 1e-8);
        // rank reduction collapses the analytic center to a single direction
        let e = sym_eig_desc(&s.x).unwrap();
        assert!(e.values[1] <= 1e-6 * e.values[0]);
    }

    #[test]
    fn infeasible_trace_bound_detected() {
        let p = SdpProblem::new(RMat::identity(2, 2), vec![(RMat::identity(2, 2), -1.0)]).unwrap();
        assert_eq!(solve(&p).status, SdpStatus::Infeasible);
        let p = SdpProblem::new(RMat::identity(2, 2), vec![(RMat::zeros(2, 2), -1.0)]).unwrap();
        assert_eq!(solve(&p).status, SdpStatus::Infeasible);
    }

    #[test]
    fn max_iter_reported() {
        let p = SdpProblem::new(
            RMat::from_diagonal(&dvector![2.0, 1.0]),
            vec![(RMat::identity(2, 2), 1.0)],
        )
        .unwrap();
        let s = solve_sdp(
            &p,
            &SdpSettings {
                max_iter: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(s.status, SdpStatus::MaxIter);
    }

    #[test]
    fn rejects_bad_problems() {
        let nonsym = RMat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(SdpProblem::new(nonsym, vec![(RMat::identity(2, 2), 1.0)]).is_err());
        assert!(SdpProblem::new(RMat::identity(2, 2), vec![]).is_err());
        assert!(SdpProblem::new(RMat::identity(2, 2), vec![(RMat::identity(3, 3), 1.0)]).is_err());
        let p = SdpProblem::new(RMat::identity(2, 2), vec![(RMat::identity(2, 2), 1.0)]).unwrap();
        assert!(solve_sdp(
            &p,
            &SdpSettings {
                gap_tol: 0.0,
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn two_constraint_solution_is_rank_one_and_feasible() {
        // maximize x1^2-ish objective with an indefinite side constraint
        let c = RMat::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.3, 0.0, 0.3, 0.5]);
        let a = RMat::from_diagonal(&dvector![1.0, -0.5, -1.0]);
        let p = SdpProblem::new(c, vec![(a.clone(), 0.0), (RMat::identity(3, 3), 1.0)]).unwrap();
        let s = solve(&p);
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!(s.duality_gap <= 1e-9);
        assert!(s.max_violation <= 1e-8);
        assert!(inner(&a, &s.x) <= 1e-8);
        let e = sym_eig_desc(&s.x).unwrap();
        assert!(e.values[1] <= 1e-6 * e.values[0], "{:?}", e.values);
        assert!(*e.values.last().unwrap() >= -1e-9);
        assert!(s.primal_objective <= s.dual_objective + 1e-9 * (1.0 + s.dual_objective.abs()));
    }

    #[test]
    fn objective_scaling_is_equivariant() {
        let c = RMat::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 0.2]);
        let a = RMat::from_diagonal(&dvector![0.3, -1.0]);
        let base = SdpProblem::new(
            c.clone(),
            vec![(a.clone(), 0.0), (RMat::identity(2, 2), 1.0)],
        )
        .unwrap();
        let scaled =
            SdpProblem::new(&c * 37.5, vec![(a, 0.0), (RMat::identity(2, 2), 1.0)]).unwrap();
        let s1 = solve(&base);
        let s2 = solve(&scaled);
        assert!(
            (s2.primal_objective - 37.5 * s1.primal_objective).abs()
                < 1e-8 * s2.primal_objective.abs()
        );
        assert!((&s1.x - &s2.x).amax() < 1e-8);
    }
}
