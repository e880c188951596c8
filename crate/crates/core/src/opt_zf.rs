//! Zero-forcing variant: stream 1 is received only through the IRS path and
//! stream 2 only through the direct path, which turns every subproblem into
//! a rank-one Rayleigh quotient with a closed-form solution.

use log::debug;

use crate::channel::{ChannelSet, ScenarioConfig};
use crate::error::{Error, Result};
use crate::metrics::{
    cascaded_channel, eve_beamformers, matched_direction, receive_power_sum, secrecy_rate, BeamformingSolution,
    EveStrategy, PhaseShiftVector,
};
use crate::numerics::{frobenius, svd, unit_modulus_project, vec_norm, ComplexMatrix, ComplexVector, DEFAULT_RANK_TOL};
use crate::opt_gao::{irs_weight, validate_loop, ConvergenceTrace, ThetaChoice, TraceRecord};
use crate::precoding::{initial_rbf, TransmitDesign};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZfSettings {
    pub epsilon: f64,
    pub max_iter: usize,
    /// Solve the beamformer subproblems inside the zero-forcing null spaces.
    /// Off: plain matched beamformers that ignore the constraints.
    pub enforce_zf_in_subproblem: bool,
    pub eve: EveStrategy,
}

impl Default for ZfSettings {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_iter: 50,
            enforce_zf_in_subproblem: true,
            eve: EveStrategy::ZeroForcing,
        }
    }
}

impl ZfSettings {
    pub fn validate(&self) -> Result<()> {
        validate_loop(self.epsilon, self.max_iter)
    }
}

/// Orthogonal projector onto the complement of the column space of `h`
/// (`rows x rows`), so that `(P u)^H h = 0` for every `u`.
pub fn null_space_projector(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = h.nrows();
    let mut p = ComplexMatrix::identity(n, n);
    if n == 0 || h.ncols() == 0 || frobenius(h) == 0.0 {
        return Ok(p);
    }
    let d = svd(h)?;
    let r = d.rank(DEFAULT_RANK_TOL);
    if r >= n {
        return Err(Error::EmptyNullSpace(format!(
            "channel spans all {n} receive dimensions"
        )));
    }
    for j in 0..r {
        let uj: ComplexVector = d.u.column(j).into_owned();
        p -= &uj * uj.adjoint();
    }
    Ok(p)
}

/// `max(‖u_B1^H H_AB^H‖, ‖u_B2^H H_IB^H‖)`: how much each stream still sees
/// of the path it is supposed to null.
pub fn stream_leakage(ch: &ChannelSet, u_b1: &ComplexVector, u_b2: &ComplexVector) -> f64 {
    let a = vec_norm(&(ch.h_ab_h.adjoint() * u_b1));
    let b = vec_norm(&(ch.h_ib_h.adjoint() * u_b2));
    a.max(b)
}

pub fn zf_update_rbf(
    ch: &ChannelSet,
    theta: &PhaseShiftVector,
    td: &TransmitDesign,
    _cfg: &ScenarioConfig,
    settings: &ZfSettings,
) -> Result<(ComplexVector, ComplexVector)> {
    let cascade = cascaded_channel(&ch.h_ib_h, theta, &ch.h_ai);
    let x1 = &cascade * &td.v1;
    let x2 = &ch.h_ab_h * &td.v2;
    if settings.enforce_zf_in_subproblem {
        let p_ab = null_space_projector(&ch.h_ab_h)?;
        let p_ib = null_space_projector(&ch.h_ib_h)?;
        Ok((
            matched_direction(&(&p_ab * &x1), vec_norm(&x1), "Bob IRS path")?,
            matched_direction(&(&p_ib * &x2), vec_norm(&x2), "Bob direct path")?,
        ))
    } else {
        Ok((
            matched_direction(&x1, frobenius(&cascade), "Bob IRS path")?,
            matched_direction(&x2, frobenius(&ch.h_ab_h), "Bob direct path")?,
        ))
    }
}

/// `θ_i = exp(j arg w1_i)`, the maximizer of `|w1^H θ|` on the unit-modulus
/// set. Entries where `w1` vanishes keep their phase from `prev`.
pub fn zf_update_theta(
    ch: &ChannelSet,
    u_b1: &ComplexVector,
    td: &TransmitDesign,
    cfg: &ScenarioConfig,
    prev: &PhaseShiftVector,
) -> Result<PhaseShiftVector> {
    let w1 = irs_weight(ch, u_b1, &td.v1, (cfg.beta1 * cfg.ps * ch.g_aib).sqrt());
    PhaseShiftVector::new(unit_modulus_project(&w1, prev.as_vector())?)
}

pub fn run_zf(
    ch: &ChannelSet,
    td: &TransmitDesign,
    cfg: &ScenarioConfig,
    settings: &ZfSettings,
) -> Result<(BeamformingSolution, ConvergenceTrace)> {
    settings.validate()?;
    initial_rbf(ch)?;
    let mut theta = PhaseShiftVector::ones(ch.m());
    let mut trace = ConvergenceTrace::default();
    let mut solution = None;

    for iteration in 1..=settings.max_iter {
        let (u_b1, u_b2) = zf_update_rbf(ch, &theta, td, cfg, settings)?;
        theta = zf_update_theta(ch, &u_b1, td, cfg, &theta)?;

        let (u_e1, u_e2) = eve_beamformers(ch, &theta, td, settings.eve)?;
        let leakage = stream_leakage(ch, &u_b1, &u_b2);
        let sol = BeamformingSolution {
            u_b1,
            u_b2,
            u_e1,
            u_e2,
            theta: theta.clone(),
        };
        let rps = receive_power_sum(ch, &sol, td, cfg);
        let r_s = secrecy_rate(ch, &sol, td, cfg)?.r_s;
        debug!("zf iteration {iteration}: rps={rps:.6e} r_s={r_s:.6} leakage={leakage:.3e}");
        solution = Some(sol);
        let record = TraceRecord {
            iteration,
            rps,
            r_s,
            theta_choice: ThetaChoice::PhaseAligned,
            stream_leakage: Some(leakage),
        };
        if trace.push(record, settings.epsilon) {
            break;
        }
    }
    let solution = solution.expect("max_iter >= 1");
    Ok((solution, trace))
}
