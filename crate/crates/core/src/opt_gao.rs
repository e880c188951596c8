//! Alternating maximization of the receive power sum: Rayleigh-Ritz updates
//! for Bob's beamformers and a closed-form stationary point for the IRS
//! phases, projected back onto the unit circle.

use log::debug;

use crate::channel::{ChannelSet, ScenarioConfig};
use crate::error::{Error, Result};
use crate::metrics::{
    effective_channel, eve_beamformers, matched_direction, receive_power_sum, secrecy_rate, BeamformingSolution,
    EveStrategy, PhaseShiftVector, Side,
};
use crate::numerics::{
    frobenius, inner, pseudo_inverse, unit_modulus_project, ComplexMatrix, ComplexVector, DEFAULT_RANK_TOL,
};
use crate::precoding::{initial_rbf, TransmitDesign};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaoSettings {
    /// Relative RPS change that counts as converged.
    pub epsilon: f64,
    pub max_iter: usize,
    /// Accept a new θ only if it raises the RPS.
    pub safeguard: bool,
    /// Eve model used for the per-iteration secrecy rate.
    pub eve: EveStrategy,
}

impl Default for GaoSettings {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_iter: 50,
            safeguard: true,
            eve: EveStrategy::WorstCase,
        }
    }
}

pub(crate) fn validate_loop(epsilon: f64, max_iter: usize) -> Result<()> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::invalid("epsilon", format!("must be positive, got {epsilon}")));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter", "must be at least 1"));
    }
    Ok(())
}

impl GaoSettings {
    pub fn validate(&self) -> Result<()> {
        validate_loop(self.epsilon, self.max_iter)
    }
}

/// Which candidate the θ update settled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaChoice {
    /// Projected stationary point.
    Stationary,
    /// Projected negated stationary point.
    Flipped,
    /// Neither candidate improved; previous θ retained.
    Kept,
    /// Safeguard off: projected stationary point taken unconditionally.
    Literal,
    /// Per-element phase alignment (zero-forcing scheme).
    PhaseAligned,
}

impl ThetaChoice {
    pub fn name(self) -> &'static str {
        match self {
            ThetaChoice::Stationary => "stationary",
            ThetaChoice::Flipped => "flipped",
            ThetaChoice::Kept => "kept",
            ThetaChoice::Literal => "literal",
            ThetaChoice::PhaseAligned => "phase-aligned",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// 1-based.
    pub iteration: usize,
    pub rps: f64,
    pub r_s: f64,
    pub theta_choice: ThetaChoice,
    /// Zero-forcing runs: `max(‖u_B1^H H_AB^H‖, ‖u_B2^H H_IB^H‖)`.
    pub stream_leakage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
    pub converged: bool,
    pub iterations_used: usize,
}

impl ConvergenceTrace {
    pub fn rps(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.rps).collect()
    }

    pub fn r_s(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.r_s).collect()
    }

    /// True when each RPS is at least the previous one minus `rel_tol` of it.
    pub fn is_non_decreasing(&self, rel_tol: f64) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].rps >= w[0].rps - rel_tol * w[0].rps.abs())
    }

    pub(crate) fn push(&mut self, record: TraceRecord, epsilon: f64) -> bool {
        let done = self
            .records
            .last()
            .is_some_and(|prev| (record.rps - prev.rps).abs() <= epsilon * prev.rps.abs());
        self.records.push(record);
        self.iterations_used = self.records.len();
        if done {
            self.converged = true;
        }
        done
    }
}

/// Bob's beamformers: `u_Bi ∝ H_B v_i`, the principal eigenvector of the
/// rank-one matrix `β_i Ps H_B v_i v_i^H H_B^H`.
pub fn gao_update_rbf(
    ch: &ChannelSet,
    theta: &PhaseShiftVector,
    td: &TransmitDesign,
    _cfg: &ScenarioConfig,
) -> Result<(ComplexVector, ComplexVector)> {
    let h_b = effective_channel(ch, theta, Side::Bob);
    let scale = frobenius(&h_b);
    Ok((
        matched_direction(&(&h_b * &td.v1), scale, "Bob stream 1")?,
        matched_direction(&(&h_b * &td.v2), scale, "Bob stream 2")?,
    ))
}

/// Linear form of the RPS in θ: stream `i` contributes `|w_i^H θ + t_i|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTerms {
    pub w1: ComplexVector,
    pub w2: ComplexVector,
    pub t1: Complex64,
    pub t2: Complex64,
}

impl ThetaTerms {
    pub fn objective(&self, theta: &PhaseShiftVector) -> f64 {
        let th = theta.as_vector();
        (inner(&self.w1, th) + self.t1).norm_sqr() + (inner(&self.w2, th) + self.t2).norm_sqr()
    }
}

/// `conj(c · (u^H H_IB^H) ⊙ (H_AI v))`, so that `w^H θ = c · u^H H_IB^H Θ H_AI v`.
pub(crate) fn irs_weight(ch: &ChannelSet, u: &ComplexVector, v: &ComplexVector, c: f64) -> ComplexVector {
    let left = ch.h_ib_h.adjoint() * u;
    let right = &ch.h_ai * v;
    left.zip_map(&right, |l, r| (l.conj() * r * c).conj())
}

pub fn gao_theta_terms(
    ch: &ChannelSet,
    u_b1: &ComplexVector,
    u_b2: &ComplexVector,
    td: &TransmitDesign,
    cfg: &ScenarioConfig,
) -> ThetaTerms {
    let p1 = cfg.beta1 * cfg.ps;
    let p2 = cfg.beta2 * cfg.ps;
    ThetaTerms {
        w1: irs_weight(ch, u_b1, &td.v1, (p1 * ch.g_aib).sqrt()),
        w2: irs_weight(ch, u_b2, &td.v2, (p2 * ch.g_aib).sqrt()),
        t1: inner(u_b1, &(&ch.h_ab_h * &td.v1)) * (p1 * ch.g_ab).sqrt(),
        t2: inner(u_b2, &(&ch.h_ab_h * &td.v2)) * (p2 * ch.g_ab).sqrt(),
    }
}

/// Stationary point of `Σ|w_i^H θ + t_i|²` over unconstrained θ:
/// `−(w1 w1^H + w2 w2^H)^† (w1 t1 + w2 t2)`.
pub fn gao_stationary_point(terms: &ThetaTerms) -> ComplexVector {
    let a: ComplexMatrix = &terms.w1 * terms.w1.adjoint() + &terms.w2 * terms.w2.adjoint();
    let b = &terms.w1 * terms.t1 + &terms.w2 * terms.t2;
    -(pseudo_inverse(&a, DEFAULT_RANK_TOL) * b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaUpdate {
    pub theta: PhaseShiftVector,
    pub choice: ThetaChoice,
}

/// θ step. With `safeguard` both `±θ_raw` are projected and the better one is
/// accepted only if it strictly beats `prev` under `rps_eval`.
pub fn gao_update_theta<F>(
    terms: &ThetaTerms,
    prev: &PhaseShiftVector,
    safeguard: bool,
    rps_eval: F,
) -> Result<ThetaUpdate>
where
    F: Fn(&PhaseShiftVector) -> f64,
{
    let raw = gao_stationary_point(terms);
    let stationary = PhaseShiftVector::new(unit_modulus_project(&raw, prev.as_vector())?)?;
    if !safeguard {
        return Ok(ThetaUpdate {
            theta: stationary,
            choice: ThetaChoice::Literal,
        });
    }
    let flipped = PhaseShiftVector::new(unit_modulus_project(&(-raw), prev.as_vector())?)?;
    let f_prev = rps_eval(prev);
    let f_stat = rps_eval(&stationary);
    let f_flip = rps_eval(&flipped);
    let (best, f_best, choice) = if f_stat >= f_flip {
        (stationary, f_stat, ThetaChoice::Stationary)
    } else {
        (flipped, f_flip, ThetaChoice::Flipped)
    };
    if f_best > f_prev {
        Ok(ThetaUpdate { theta: best, choice })
    } else {
        Ok(ThetaUpdate {
            theta: prev.clone(),
            choice: ThetaChoice::Kept,
        })
    }
}

pub fn run_gao(
    ch: &ChannelSet,
    td: &TransmitDesign,
    cfg: &ScenarioConfig,
    settings: &GaoSettings,
) -> Result<(BeamformingSolution, ConvergenceTrace)> {
    settings.validate()?;
    // The receive update runs first; the SVD start is only a feasibility check.
    initial_rbf(ch)?;
    let mut theta = PhaseShiftVector::ones(ch.m());
    let mut trace = ConvergenceTrace::default();
    let mut solution = None;

    for iteration in 1..=settings.max_iter {
        let (u_b1, u_b2) = gao_update_rbf(ch, &theta, td, cfg)?;
        let terms = gao_theta_terms(ch, &u_b1, &u_b2, td, cfg);
        let update = gao_update_theta(&terms, &theta, settings.safeguard, |t| terms.objective(t))?;
        theta = update.theta;

        let (u_e1, u_e2) = eve_beamformers(ch, &theta, td, settings.eve)?;
        let sol = BeamformingSolution {
            u_b1,
            u_b2,
            u_e1,
            u_e2,
            theta: theta.clone(),
        };
        let rps = receive_power_sum(ch, &sol, td, cfg);
        let r_s = secrecy_rate(ch, &sol, td, cfg)?.r_s;
        debug!(
            "gao iteration {iteration}: rps={rps:.6e} r_s={r_s:.6} theta={}",
            update.choice.name()
        );
        solution = Some(sol);
        let record = TraceRecord {
            iteration,
            rps,
            r_s,
            theta_choice: update.choice,
            stream_leakage: None,
        };
        if trace.push(record, settings.epsilon) {
            break;
        }
    }
    let solution = solution.expect("max_iter >= 1");
    Ok((solution, trace))
}
