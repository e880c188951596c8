//! Transmit side: the stacked confidential-message channel, the artificial
//! noise projector and the two CM precoders, plus the SVD-based starting
//! point for Bob's receive beamformers.

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::numerics::{pseudo_inverse, svd, ComplexMatrix, ComplexVector, DEFAULT_RANK_TOL};

/// CM precoders and the AN projector.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitDesign {
    pub v1: ComplexVector,
    pub v2: ComplexVector,
    pub p_an: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialRbf {
    pub u_b1: ComplexVector,
    pub u_b2: ComplexVector,
}

/// `[H_AI; H_AB^H]`, shape `(M + N_B) x N_A`.
pub fn stack_cm_channel(ch: &ChannelSet) -> ComplexMatrix {
    let (m, n_b, n_a) = (ch.m(), ch.n_b(), ch.n_a());
    let mut out = ComplexMatrix::zeros(m + n_b, n_a);
    out.rows_mut(0, m).copy_from(&ch.h_ai);
    out.rows_mut(m, n_b).copy_from(&ch.h_ab_h);
    out
}

/// Numerical rank of `H_CM`; used for every rank decision on it.
pub fn cm_rank(h_cm: &ComplexMatrix, rank_tol: f64) -> usize {
    svd(h_cm).map(|d| d.rank(rank_tol)).unwrap_or(0)
}

/// `I − H_CM^H (H_CM H_CM^H)^† H_CM`, evaluated as `I − V_r V_r^H` from the
/// SVD of `H_CM` so the Gram matrix (and its squared condition number) is
/// never formed.
pub fn an_projection(h_cm: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    let n_a = h_cm.ncols();
    let mut p = ComplexMatrix::identity(n_a, n_a);
    if let Ok(d) = svd(h_cm) {
        for j in 0..d.rank(rank_tol) {
            let vj: ComplexVector = d.v.column(j).into_owned();
            p -= &vj * vj.adjoint();
        }
    }
    p
}

/// `I − H^H (H H^H)^† H` through an explicit pseudo-inverse of the Gram
/// matrix. Only accurate for well-conditioned `H_CM`; kept as a reference.
pub fn an_projection_via_pinv(h_cm: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    let n_a = h_cm.ncols();
    let gram = h_cm * h_cm.adjoint();
    ComplexMatrix::identity(n_a, n_a) - h_cm.adjoint() * pseudo_inverse(&gram, rank_tol) * h_cm
}

/// First two right singular vectors of `H_CM`.
pub fn transmit_beamformers(h_cm: &ComplexMatrix, rank_tol: f64) -> Result<(ComplexVector, ComplexVector)> {
    let rank = cm_rank(h_cm, rank_tol);
    if rank < 2 {
        return Err(Error::DegenerateGeometry(format!(
            "H_CM has rank {rank}; two confidential streams need rank 2"
        )));
    }
    let d = svd(h_cm)?;
    Ok((d.v.column(0).into_owned(), d.v.column(1).into_owned()))
}

pub fn transmit_design(ch: &ChannelSet) -> Result<TransmitDesign> {
    let h_cm = stack_cm_channel(ch);
    let (v1, v2) = transmit_beamformers(&h_cm, DEFAULT_RANK_TOL)?;
    Ok(TransmitDesign {
        v1,
        v2,
        p_an: an_projection(&h_cm, DEFAULT_RANK_TOL),
    })
}

/// Two leading left singular vectors of `H_BR = [H_IB^H  H_AB^H]`.
pub fn initial_rbf(ch: &ChannelSet) -> Result<InitialRbf> {
    let (n_b, m, n_a) = (ch.n_b(), ch.m(), ch.n_a());
    if n_b < 2 {
        return Err(Error::DegenerateBeamformer(format!(
            "Bob needs at least two antennas for two receive beamformers, has {n_b}"
        )));
    }
    let mut h_br = ComplexMatrix::zeros(n_b, m + n_a);
    h_br.columns_mut(0, m).copy_from(&ch.h_ib_h);
    h_br.columns_mut(m, n_a).copy_from(&ch.h_ab_h);
    let d = svd(&h_br)?;
    Ok(InitialRbf {
        u_b1: d.u.column(0).into_owned(),
        u_b2: d.u.column(1).into_owned(),
    })
}
