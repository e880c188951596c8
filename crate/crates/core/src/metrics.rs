//! Effective channels, achievable rates, secrecy rate and the receive power
//! sum (RPS) that both optimizers maximize.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::{ChannelSet, ScenarioConfig};
use crate::error::{Error, Result};
use crate::numerics::{inner, rank_one_principal, vec_norm, ComplexMatrix, ComplexVector, DEFAULT_RANK_TOL};
use crate::opt_zf::null_space_projector;
use crate::precoding::TransmitDesign;

/// Accepted deviation of `|θ_i|` from one.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;

/// IRS phase-shift vector `θ` (the diagonal of `Θ`), every entry of modulus one.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShiftVector(ComplexVector);

impl PhaseShiftVector {
    pub fn new(theta: ComplexVector) -> Result<Self> {
        if let Some((i, z)) = theta.iter().enumerate().find(|(_, z)| {
            let dev = (z.norm() - 1.0).abs();
            dev.is_nan() || dev > UNIT_MODULUS_TOL
        }) {
            return Err(Error::Domain(format!("theta[{i}] = {z} is not unit-modulus")));
        }
        Ok(Self(theta))
    }

    /// All phases zero.
    pub fn ones(m: usize) -> Self {
        Self(ComplexVector::from_element(m, Complex64::new(1.0, 0.0)))
    }

    pub fn from_phases(phases: &[f64]) -> Self {
        Self(ComplexVector::from_iterator(
            phases.len(),
            phases.iter().map(|&p| Complex64::from_polar(1.0, p)),
        ))
    }

    /// Phases wrapped to `[0, 2π)`.
    pub fn phases(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.arg().rem_euclid(2.0 * PI)).collect()
    }

    pub fn as_vector(&self) -> &ComplexVector {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Receive beamformers of Bob and Eve plus the IRS phases.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    pub u_b1: ComplexVector,
    pub u_b2: ComplexVector,
    pub u_e1: ComplexVector,
    pub u_e2: ComplexVector,
    pub theta: PhaseShiftVector,
}

/// Stream gains `[[a, b], [c, d]]`: row = receive beamformer, column = stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gain2x2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Gain2x2 {
    fn rows(&self) -> [[Complex64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    /// bits/s/Hz
    pub r_b: f64,
    pub r_e: f64,
    pub r_s: f64,
    /// Receive power sum at Bob, watts.
    pub rps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Bob,
    Eve,
}

/// How Eve picks her receive beamformers when a rate is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EveStrategy {
    /// `u_Ei` is the principal eigenvector of `H_E v_i v_i^H H_E^H`.
    WorstCase,
    /// `u_E1 ⟂ H_AE^H`, `u_E2 ⟂ H_IE^H`, each matched to the remaining path.
    ZeroForcing,
}

impl EveStrategy {
    pub fn name(self) -> &'static str {
        match self {
            EveStrategy::WorstCase => "worst-case",
            EveStrategy::ZeroForcing => "zero-forcing",
        }
    }
}

/// `H_{IB}^H Θ H_AI` (or the Eve counterpart) without path loss.
pub fn cascaded_channel(irs_to_rx: &ComplexMatrix, theta: &PhaseShiftVector, h_ai: &ComplexMatrix) -> ComplexMatrix {
    let mut scaled = irs_to_rx.clone();
    for (j, t) in theta.as_vector().iter().enumerate() {
        let mut col = scaled.column_mut(j);
        col *= *t;
    }
    scaled * h_ai
}

/// `H_B = √g_AIB H_IB^H Θ H_AI + √g_AB H_AB^H`, or `H_E` for `Side::Eve`.
pub fn effective_channel(ch: &ChannelSet, theta: &PhaseShiftVector, side: Side) -> ComplexMatrix {
    let (irs, direct, g_irs, g_direct) = match side {
        Side::Bob => (&ch.h_ib_h, &ch.h_ab_h, ch.g_aib, ch.g_ab),
        Side::Eve => (&ch.h_ie_h, &ch.h_ae_h, ch.g_aie, ch.g_ae),
    };
    cascaded_channel(irs, theta, &ch.h_ai).scale(g_irs.sqrt()) + direct.scale(g_direct.sqrt())
}

#[allow(clippy::too_many_arguments)]
pub fn gain_2x2(
    h: &ComplexMatrix,
    u1: &ComplexVector,
    u2: &ComplexVector,
    v1: &ComplexVector,
    v2: &ComplexVector,
    beta1: f64,
    beta2: f64,
    ps: f64,
) -> Gain2x2 {
    let hv1 = h * v1;
    let hv2 = h * v2;
    let s1 = (beta1 * ps).sqrt();
    let s2 = (beta2 * ps).sqrt();
    Gain2x2 {
        a: inner(u1, &hv1) * s1,
        b: inner(u1, &hv2) * s2,
        c: inner(u2, &hv1) * s1,
        d: inner(u2, &hv2) * s2,
    }
}

/// `log2 det(I + G G^H [U^H C U]^{-1})` with `C = σ² I + interference`.
///
/// `U = [u1 u2]` is orthonormalized first (`U = QR`); the rate is invariant
/// under that change of basis and the orthonormal form stays well
/// conditioned when `u1` and `u2` are nearly parallel.
fn log_det_rate(
    g: &Gain2x2,
    u1: &ComplexVector,
    u2: &ComplexVector,
    interference: Option<&ComplexMatrix>,
    sigma2: f64,
) -> Result<f64> {
    if u1.len() != u2.len() {
        return Err(Error::Dimension("receive beamformers differ in length".into()));
    }
    let r11 = vec_norm(u1);
    let n2 = vec_norm(u2);
    if !(r11 > 0.0 && n2 > 0.0) {
        return Err(Error::DegenerateBeamformer("zero receive beamformer".into()));
    }
    let q1 = u1.unscale(r11);
    let r12 = inner(&q1, u2);
    let w = u2 - &q1 * r12;
    let r22 = vec_norm(&w);
    if r22 <= DEFAULT_RANK_TOL * n2 {
        return Err(Error::DegenerateBeamformer(
            "receive beamformers are parallel; U^H U is singular".into(),
        ));
    }
    let q2 = w.unscale(r22);

    // G' = R^{-H} G, the gains seen through the orthonormal basis Q.
    let rows = g.rows();
    let g1 = [rows[0][0] / r11, rows[0][1] / r11];
    let g2 = [
        (rows[1][0] - r12.conj() * g1[0]) / r22,
        (rows[1][1] - r12.conj() * g1[1]) / r22,
    ];

    // N' = Q^H C Q
    let (mut n11, mut n12, mut n22) = (sigma2, Complex64::new(0.0, 0.0), sigma2);
    if let Some(c) = interference {
        let cq1 = c * &q1;
        let cq2 = c * &q2;
        n11 += inner(&q1, &cq1).re;
        n12 += inner(&q1, &cq2);
        n22 += inner(&q2, &cq2).re;
    }
    // Cholesky N' = L L^H
    let l11 = n11.sqrt();
    let l21 = n12.conj() / l11;
    let l22_sq = n22 - l21.norm_sqr();
    if !(l11 > 0.0 && l22_sq > 0.0) {
        return Err(Error::DegenerateBeamformer(
            "noise covariance is not positive definite".into(),
        ));
    }
    let l22 = l22_sq.sqrt();

    // K = L^{-1} G'; det(I + K K^H) = 1 + ‖K‖_F² + |det K|² for 2x2.
    let k1 = [g1[0] / l11, g1[1] / l11];
    let k2 = [(g2[0] - l21 * k1[0]) / l22, (g2[1] - l21 * k1[1]) / l22];
    let fro = k1[0].norm_sqr() + k1[1].norm_sqr() + k2[0].norm_sqr() + k2[1].norm_sqr();
    let det = k1[0] * k2[1] - k1[1] * k2[0];
    Ok((1.0 + fro + det.norm_sqr()).log2())
}

/// Bob's achievable rate for the 2x2 gain matrix `g` seen through `u1, u2`.
pub fn rate_bob(g: &Gain2x2, u1: &ComplexVector, u2: &ComplexVector, sigma2: f64) -> Result<f64> {
    log_det_rate(g, u1, u2, None, sigma2)
}

/// `β₃ Ps g_AE H_AE^H P_AN P_AN^H H_AE`, the AN covariance at Eve's antennas.
pub fn an_covariance_at_eve(ch: &ChannelSet, p_an: &ComplexMatrix, beta3: f64, ps: f64) -> ComplexMatrix {
    let hp = &ch.h_ae_h * p_an;
    (&hp * hp.adjoint()).scale(beta3 * ps * ch.g_ae)
}

/// Eve's achievable rate, with the artificial noise as extra interference.
#[allow(clippy::too_many_arguments)]
pub fn rate_eve(
    g: &Gain2x2,
    u1: &ComplexVector,
    u2: &ComplexVector,
    ch: &ChannelSet,
    p_an: &ComplexMatrix,
    beta3: f64,
    ps: f64,
    sigma2: f64,
) -> Result<f64> {
    let an = an_covariance_at_eve(ch, p_an, beta3, ps);
    log_det_rate(g, u1, u2, Some(&an), sigma2)
}

/// `β₁Ps|u_B1^H H_B v1|² + β₂Ps|u_B2^H H_B v2|²`.
pub fn receive_power_sum(ch: &ChannelSet, sol: &BeamformingSolution, td: &TransmitDesign, cfg: &ScenarioConfig) -> f64 {
    let h_b = effective_channel(ch, &sol.theta, Side::Bob);
    cfg.beta1 * cfg.ps * inner(&sol.u_b1, &(&h_b * &td.v1)).norm_sqr()
        + cfg.beta2 * cfg.ps * inner(&sol.u_b2, &(&h_b * &td.v2)).norm_sqr()
}

pub fn secrecy_rate(
    ch: &ChannelSet,
    sol: &BeamformingSolution,
    td: &TransmitDesign,
    cfg: &ScenarioConfig,
) -> Result<RateReport> {
    let h_b = effective_channel(ch, &sol.theta, Side::Bob);
    let h_e = effective_channel(ch, &sol.theta, Side::Eve);
    let gb = gain_2x2(&h_b, &sol.u_b1, &sol.u_b2, &td.v1, &td.v2, cfg.beta1, cfg.beta2, cfg.ps);
    let ge = gain_2x2(&h_e, &sol.u_e1, &sol.u_e2, &td.v1, &td.v2, cfg.beta1, cfg.beta2, cfg.ps);
    let r_b = rate_bob(&gb, &sol.u_b1, &sol.u_b2, cfg.sigma2)?;
    let r_e = rate_eve(&ge, &sol.u_e1, &sol.u_e2, ch, &td.p_an, cfg.beta3, cfg.ps, cfg.sigma2)?;
    Ok(RateReport {
        r_b,
        r_e,
        r_s: (r_b - r_e).max(0.0),
        rps: gb.a.norm_sqr() + gb.d.norm_sqr(),
    })
}

/// Unit vector along `x`; fails when `‖x‖ ≤ DEFAULT_RANK_TOL·reference`.
pub(crate) fn matched_direction(x: &ComplexVector, reference: f64, what: &str) -> Result<ComplexVector> {
    let n = vec_norm(x);
    if n.is_nan() || n <= DEFAULT_RANK_TOL * reference || n <= 0.0 {
        return Err(Error::DegenerateBeamformer(format!("{what}: channel vanishes")));
    }
    rank_one_principal(x)
        .map(|(_, v)| v)
        .ok_or_else(|| Error::DegenerateBeamformer(format!("{what}: channel vanishes")))
}

/// Eve's two receive beamformers under `strategy`.
pub fn eve_beamformers(
    ch: &ChannelSet,
    theta: &PhaseShiftVector,
    td: &TransmitDesign,
    strategy: EveStrategy,
) -> Result<(ComplexVector, ComplexVector)> {
    match strategy {
        EveStrategy::WorstCase => {
            let h_e = effective_channel(ch, theta, Side::Eve);
            let scale = crate::numerics::frobenius(&h_e);
            Ok((
                matched_direction(&(&h_e * &td.v1), scale, "Eve stream 1")?,
                matched_direction(&(&h_e * &td.v2), scale, "Eve stream 2")?,
            ))
        }
        EveStrategy::ZeroForcing => {
            let p_ae = null_space_projector(&ch.h_ae_h)?;
            let p_ie = null_space_projector(&ch.h_ie_h)?;
            let x1 = cascaded_channel(&ch.h_ie_h, theta, &ch.h_ai) * &td.v1;
            let x2 = &ch.h_ae_h * &td.v2;
            Ok((
                matched_direction(&(&p_ae * &x1), vec_norm(&x1), "Eve IRS path")?,
                matched_direction(&(&p_ie * &x2), vec_norm(&x2), "Eve direct path")?,
            ))
        }
    }
}

/// Rates when only one CM stream is sent along `v` with power `(β₁+β₂)Ps`.
pub fn single_stream_report(
    ch: &ChannelSet,
    theta: &PhaseShiftVector,
    u_b: &ComplexVector,
    u_e: &ComplexVector,
    v: &ComplexVector,
    p_an: &ComplexMatrix,
    cfg: &ScenarioConfig,
) -> Result<RateReport> {
    let power = (cfg.beta1 + cfg.beta2) * cfg.ps;
    let h_b = effective_channel(ch, theta, Side::Bob);
    let h_e = effective_channel(ch, theta, Side::Eve);
    let nb = vec_norm(u_b).powi(2);
    let ne = vec_norm(u_e).powi(2);
    if !(nb > 0.0 && ne > 0.0) {
        return Err(Error::DegenerateBeamformer("zero receive beamformer".into()));
    }
    let sig_b = power * inner(u_b, &(&h_b * v)).norm_sqr();
    let sig_e = power * inner(u_e, &(&h_e * v)).norm_sqr();
    let an = an_covariance_at_eve(ch, p_an, cfg.beta3, cfg.ps);
    let jam = inner(u_e, &(&an * u_e)).re;
    let r_b = (1.0 + sig_b / (cfg.sigma2 * nb)).log2();
    let r_e = (1.0 + sig_e / (cfg.sigma2 * ne + jam)).log2();
    Ok(RateReport {
        r_b,
        r_e,
        r_s: (r_b - r_e).max(0.0),
        rps: sig_b,
    })
}
