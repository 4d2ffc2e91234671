//! Transmit beamformers: MRT, the SIR-constrained SDR design and the
//! complete-cancellation (null-space) design.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alpha::AlphaDb;
use crate::metrics::{eta_db, received_powers};
use crate::numerics::{
    complex_reassemble, from_db, norm_sqr, normalize_global_phase, real_embed_matrix, sym_eig_desc,
    CVec, RMat, RVec,
};
use crate::scene::ChannelSet;
use crate::sdp::{solve_sdp, SdpProblem, SdpSettings, SdpStatus};
use crate::{Error, Result};

/// Relative eigenvalue threshold that defines the numerical null space of `M_DL`.
pub const DEFAULT_NULL_EPS: f64 = 1e-10;

/// `lambda_2 / lambda_1` above this is logged as a loose relaxation.
pub const TIGHTNESS_WARN: f64 = 1e-3;

/// Eigenvalues within this relative distance of `lambda_1` are treated as tied.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mrt,
    Sdr,
    #[serde(rename = "null")]
    NullSpace,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mrt => "mrt",
            Method::Sdr => "sdr",
            Method::NullSpace => "null",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mrt" => Ok(Method::Mrt),
            "sdr" => Ok(Method::Sdr),
            "null" => Ok(Method::NullSpace),
            _ => Err(Error::InvalidInput(format!("unknown method `{s}`"))),
        }
    }
}

/// Solver diagnostics carried by SDR outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpReport {
    pub duality_gap: f64,
    pub max_violation: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct BeamformerOutput {
    pub x: CVec,
    /// `‖H_DL x‖² / ‖H_BD x‖²` in dB, `-inf` when the direct link is cancelled.
    pub achieved_eta_db: f64,
    /// `‖H_BD x‖²`.
    pub objective: f64,
    /// `lambda_2 / lambda_1` of the relaxed solution; zero for the analytic designs.
    pub rank_ratio: f64,
    pub method: Method,
    /// `‖H_DL x‖²`, kept raw so cancelled designs can be audited.
    pub residual_dli: f64,
    pub sdp: Option<SdpReport>,
}

/// Which beamformer to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Design {
    Mrt,
    /// SIR-constrained design; `-inf` selects the null-space path.
    Alpha(AlphaDb),
}

impl Design {
    pub fn method(self) -> Method {
        match self {
            Design::Mrt => Method::Mrt,
            Design::Alpha(a) if a.is_neg_inf() => Method::NullSpace,
            Design::Alpha(_) => Method::Sdr,
        }
    }

    /// The constraint value, if any.
    pub fn alpha(self) -> Option<AlphaDb> {
        match self {
            Design::Mrt => None,
            Design::Alpha(a) => Some(a),
        }
    }
}

pub fn design(channels: &ChannelSet, which: Design, p_max: f64) -> Result<BeamformerOutput> {
    match which {
        Design::Mrt => mrt(channels, p_max),
        Design::Alpha(a) if a.is_neg_inf() => {
            null_dli_beamformer(channels, p_max, DEFAULT_NULL_EPS)
        }
        Design::Alpha(a) => sdr_beamformer(channels, a.0, p_max),
    }
}

fn check_power(p_max: f64) -> Result<()> {
    if !(p_max > 0.0) || !p_max.is_finite() {
        return Err(Error::InvalidInput(format!(
            "p_max must be positive and finite, got {p_max}"
        )));
    }
    Ok(())
}

/// `sqrt(p_max) conj(h_C) / ‖h_C‖`.
pub fn mrt_vector(h_c: &CVec, p_max: f64) -> Result<CVec> {
    check_power(p_max)?;
    let n = norm_sqr(h_c).sqrt();
    if !(n > 0.0) {
        return Err(Error::InvalidInput(
            "MRT needs a nonzero CE-to-BDE channel".into(),
        ));
    }
    Ok(h_c.map(|z| z.conj() * (p_max.sqrt() / n)))
}

/// MRT toward the BDE. Unlike the optimized designs the phase is left as the
/// conjugate channel gives it.
pub fn mrt(channels: &ChannelSet, p_max: f64) -> Result<BeamformerOutput> {
    let x = mrt_vector(&channels.h_c, p_max)?;
    finish(channels, x, Method::Mrt, 0.0, None)
}

/// Relaxed problem: maximize `tr(M_BD X)` subject to
/// `tr((M_DL - alpha M_BD) X) <= 0`, `tr X <= p_max`, `X >= 0`.
pub fn build_sdr_problem(
    channels: &ChannelSet,
    alpha_linear: f64,
    p_max: f64,
) -> Result<SdpProblem> {
    if !(alpha_linear >= 0.0) || !alpha_linear.is_finite() {
        return Err(Error::InvalidInput(format!(
            "alpha must be finite and non-negative, got {alpha_linear}"
        )));
    }
    check_power(p_max)?;
    let m_bd = real_embed_matrix(&channels.h_bd).gram();
    let m_dl = real_embed_matrix(&channels.h_dl).gram();
    let sir = &m_dl - &m_bd * alpha_linear;
    let dim = m_bd.nrows();
    SdpProblem::new(m_bd, vec![(sir, 0.0), (RMat::identity(dim, dim), p_max)])
}

pub fn sdr_beamformer(
    channels: &ChannelSet,
    alpha_db: f64,
    p_max: f64,
) -> Result<BeamformerOutput> {
    if !alpha_db.is_finite() {
        return Err(Error::InvalidInput(format!(
            "SDR design needs a finite alpha, got {alpha_db}"
        )));
    }
    let problem = build_sdr_problem(channels, from_db(alpha_db), p_max)?;
    let sol = solve_sdp(&problem, &SdpSettings::default())?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Solver(format!(
            "status {:?} after {} iterations (alpha = {alpha_db} dB)",
            sol.status, sol.iterations
        )));
    }
    let e = sym_eig_desc(&sol.x)?;
    let lam1 = e.values[0];
    if !(lam1 > 0.0) {
        return Err(Error::Solver("relaxed solution is zero".into()));
    }
    let rank_ratio = e.values.get(1).map_or(0.0, |&l| l.max(0.0) / lam1);
    if rank_ratio > TIGHTNESS_WARN {
        log::warn!(
            "relaxation not tight at alpha = {alpha_db} dB: lambda2/lambda1 = {rank_ratio:.3e}"
        );
    }
    let tied = e
        .values
        .iter()
        .take_while(|&&l| l >= lam1 * (1.0 - TIE_TOL))
        .count();
    let q = best_in_span(
        &e.vectors.columns(0, tied).into_owned(),
        problem.objective(),
    )?;
    let mut x = complex_reassemble(&(q * p_max.sqrt()))?;
    normalize_global_phase(&mut x);
    let report = SdpReport {
        duality_gap: sol.duality_gap,
        max_violation: sol.max_violation,
        iterations: sol.iterations,
    };
    finish(channels, x, Method::Sdr, rank_ratio, Some(report))
}

/// Complete-cancellation design: restrict `x'` to eigenvectors of `M_DL`
/// with eigenvalue at most `eps_rel * lambda_max` and maximize the
/// backscatter power inside that subspace.
pub fn null_dli_beamformer(
    channels: &ChannelSet,
    p_max: f64,
    eps_rel: f64,
) -> Result<BeamformerOutput> {
    check_power(p_max)?;
    if !(eps_rel >= 0.0) || !eps_rel.is_finite() {
        return Err(Error::InvalidInput(format!(
            "eps_rel must be finite and non-negative, got {eps_rel}"
        )));
    }
    let m_dl = real_embed_matrix(&channels.h_dl).gram();
    let m_bd = real_embed_matrix(&channels.h_bd).gram();
    let e = sym_eig_desc(&m_dl)?;
    let thr = eps_rel * e.values[0].max(0.0);
    let keep: Vec<usize> = (0..e.dim()).filter(|&i| e.values[i] <= thr).collect();
    if keep.is_empty() {
        return Err(Error::EmptyNullSpace { eps_rel });
    }
    let basis = e.vectors.select_columns(&keep);
    let q = best_in_span(&basis, &m_bd)?;
    let mut x = complex_reassemble(&(q * p_max.sqrt()))?;
    normalize_global_phase(&mut x);
    finish(channels, x, Method::NullSpace, 0.0, None)
}

/// Unit vector in the column span of the orthonormal `basis` maximizing `v^T m v`.
fn best_in_span(basis: &RMat, m: &RMat) -> Result<RVec> {
    if basis.ncols() == 1 {
        return Ok(basis.column(0).into_owned());
    }
    let proj = basis.transpose() * m * basis;
    let proj = (&proj + proj.transpose()) * 0.5;
    let w = sym_eig_desc(&proj)?;
    let v = basis * w.vectors.column(0);
    let n = v.norm();
    Ok(v / n)
}

fn finish(
    channels: &ChannelSet,
    x: CVec,
    method: Method,
    rank_ratio: f64,
    sdp: Option<SdpReport>,
) -> Result<BeamformerOutput> {
    let (residual_dli, objective) = received_powers(channels, &x)?;
    let achieved_eta_db = eta_db(channels, &x)?;
    Ok(BeamformerOutput {
        x,
        achieved_eta_db,
        objective,
        rank_ratio,
        method,
        residual_dli,
        sdp,
    })
}
