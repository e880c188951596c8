//! Scenario geometry: ULA steering vectors, rank-one LOS channels and
//! distance-based path loss.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{outer, ComplexMatrix, ComplexVector};

/// A uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArraySpec {
    pub n: usize,
    /// Element spacing in wavelengths (d/λ).
    pub spacing_over_wavelength: f64,
}

impl ArraySpec {
    pub fn new(n: usize, spacing_over_wavelength: f64) -> Self {
        Self {
            n,
            spacing_over_wavelength,
        }
    }
}

/// Departure/arrival angle pair of one link, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkAngles {
    pub departure: f64,
    pub arrival: f64,
}

impl LinkAngles {
    pub const fn new(departure: f64, arrival: f64) -> Self {
        Self { departure, arrival }
    }
}

/// Angles of the five LOS links: Alice→IRS, Alice→Bob, Alice→Eve, IRS→Bob, IRS→Eve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Links {
    pub ai: LinkAngles,
    pub ab: LinkAngles,
    pub ae: LinkAngles,
    pub ib: LinkAngles,
    pub ie: LinkAngles,
}

impl Default for Links {
    fn default() -> Self {
        Self {
            ai: LinkAngles::new(5.0 * PI / 36.0, PI / 4.0),
            ab: LinkAngles::new(11.0 * PI / 36.0, PI / 6.0),
            ae: LinkAngles::new(PI / 3.0, PI / 5.0),
            // Bob and Eve must see the IRS from a different direction than
            // Alice, otherwise both of their channels collapse to rank one.
            ib: LinkAngles::new(2.0 * PI / 5.0, 2.0 * PI / 3.0),
            ie: LinkAngles::new(5.0 * PI / 12.0, 3.0 * PI / 4.0),
        }
    }
}

/// Everything needed to build one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_a: usize,
    pub n_b: usize,
    pub n_e: usize,
    /// IRS element count.
    pub m: usize,
    pub links: Links,
    pub d_ai: f64,
    pub d_ab: f64,
    pub d_ae: f64,
    pub d_ib: f64,
    pub d_ie: f64,
    /// Total transmit power in watts.
    pub ps: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    /// Noise power in watts, shared by Bob and Eve.
    pub sigma2: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    pub spacing_over_wavelength: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_a: 16,
            n_b: 4,
            n_e: 4,
            m: 80,
            links: Links::default(),
            d_ai: 10.0,
            d_ab: 50.0,
            d_ae: 50.0,
            d_ib: 40.0,
            d_ie: 40.0,
            ps: 1.0,
            beta1: 0.4,
            beta2: 0.4,
            beta3: 0.2,
            sigma2: 1e-8,
            alpha: 2.0,
            spacing_over_wavelength: 0.5,
        }
    }
}

/// Tolerance on `beta1 + beta2 + beta3 = 1`.
pub const BETA_SUM_TOL: f64 = 1e-9;

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Noise power that gives `Ps/σ²` equal to `snr_db`.
pub fn sigma2_for_snr(ps: f64, snr_db: f64) -> f64 {
    ps / 10f64.powf(snr_db / 10.0)
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        for (key, n) in [("n_a", self.n_a), ("n_b", self.n_b), ("n_e", self.n_e), ("m", self.m)] {
            if n == 0 {
                return Err(Error::invalid(key, "must be at least 1"));
            }
        }
        let angles = [
            ("theta_t_ai", self.links.ai.departure),
            ("theta_r_ai", self.links.ai.arrival),
            ("theta_t_ab", self.links.ab.departure),
            ("theta_r_ab", self.links.ab.arrival),
            ("theta_t_ae", self.links.ae.departure),
            ("theta_r_ae", self.links.ae.arrival),
            ("theta_t_ib", self.links.ib.departure),
            ("theta_r_ib", self.links.ib.arrival),
            ("theta_t_ie", self.links.ie.departure),
            ("theta_r_ie", self.links.ie.arrival),
        ];
        for (key, a) in angles {
            if !(a.is_finite() && (0.0..2.0 * PI).contains(&a)) {
                return Err(Error::invalid(key, format!("{a} is outside [0, 2π)")));
            }
        }
        let positive = [
            ("d_ai", self.d_ai),
            ("d_ab", self.d_ab),
            ("d_ae", self.d_ae),
            ("d_ib", self.d_ib),
            ("d_ie", self.d_ie),
            ("ps", self.ps),
            ("sigma2", self.sigma2),
            ("spacing_over_wavelength", self.spacing_over_wavelength),
        ];
        for (key, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::invalid(key, format!("{x} must be positive")));
            }
        }
        if !self.alpha.is_finite() {
            return Err(Error::invalid("alpha", "must be finite"));
        }
        for (key, b) in [("beta1", self.beta1), ("beta2", self.beta2), ("beta3", self.beta3)] {
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::invalid(key, format!("{b} must be non-negative")));
            }
        }
        let sum = self.beta1 + self.beta2 + self.beta3;
        if (sum - 1.0).abs() > BETA_SUM_TOL {
            return Err(Error::invalid(
                "beta3",
                format!("beta1 + beta2 + beta3 = {sum}, expected 1"),
            ));
        }
        Ok(())
    }

    pub fn alice(&self) -> ArraySpec {
        ArraySpec::new(self.n_a, self.spacing_over_wavelength)
    }

    pub fn bob(&self) -> ArraySpec {
        ArraySpec::new(self.n_b, self.spacing_over_wavelength)
    }

    pub fn eve(&self) -> ArraySpec {
        ArraySpec::new(self.n_e, self.spacing_over_wavelength)
    }

    pub fn irs(&self) -> ArraySpec {
        ArraySpec::new(self.m, self.spacing_over_wavelength)
    }
}

/// The five LOS channel matrices and the four path-loss gains.
///
/// `*_h` fields hold the conjugate-transposed channel as it appears at the
/// receiver, e.g. `h_ab_h` is `H_AB^H` (`N_B x N_A`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Alice → IRS, `M x N_A`.
    pub h_ai: ComplexMatrix,
    pub h_ab_h: ComplexMatrix,
    pub h_ae_h: ComplexMatrix,
    /// IRS → Bob, `N_B x M`.
    pub h_ib_h: ComplexMatrix,
    pub h_ie_h: ComplexMatrix,
    pub g_aib: f64,
    pub g_aie: f64,
    pub g_ab: f64,
    pub g_ae: f64,
}

impl ChannelSet {
    pub fn n_a(&self) -> usize {
        self.h_ai.ncols()
    }

    pub fn m(&self) -> usize {
        self.h_ai.nrows()
    }

    pub fn n_b(&self) -> usize {
        self.h_ab_h.nrows()
    }

    pub fn n_e(&self) -> usize {
        self.h_ae_h.nrows()
    }
}

/// Phase progression `Ψ_θ(k)` of element `k` (1-based) of an `n`-element ULA.
pub fn steering_phase(theta: f64, k: usize, arr: ArraySpec) -> f64 {
    let centre = (arr.n as f64 + 1.0) / 2.0;
    -((k as f64 - centre) * arr.spacing_over_wavelength * theta.cos())
}

/// Unit-norm ULA steering vector `h(θ)`.
pub fn steering_vector(theta: f64, arr: ArraySpec) -> ComplexVector {
    let amp = 1.0 / (arr.n as f64).sqrt();
    ComplexVector::from_iterator(
        arr.n,
        (1..=arr.n).map(|k| Complex64::from_polar(amp, 2.0 * PI * steering_phase(theta, k, arr))),
    )
}

/// `h(rx_angle) h(tx_angle)^H`, an `rx.n x tx.n` rank-one channel.
pub fn los_channel(rx_angle: f64, rx: ArraySpec, tx_angle: f64, tx: ArraySpec) -> ComplexMatrix {
    outer(&steering_vector(rx_angle, rx), &steering_vector(tx_angle, tx))
}

/// Linear power gain `d^(−α)`.
pub fn path_loss(dist_m: f64, alpha: f64) -> Result<f64> {
    if !(dist_m.is_finite() && dist_m > 0.0) {
        return Err(Error::Domain(format!(
            "path loss needs a positive distance, got {dist_m}"
        )));
    }
    Ok(dist_m.powf(-alpha))
}

pub fn build_channels(cfg: &ScenarioConfig) -> Result<ChannelSet> {
    cfg.validate()?;
    let (alice, bob, eve, irs) = (cfg.alice(), cfg.bob(), cfg.eve(), cfg.irs());
    let l = &cfg.links;
    let g_ai = path_loss(cfg.d_ai, cfg.alpha)?;
    Ok(ChannelSet {
        h_ai: los_channel(l.ai.arrival, irs, l.ai.departure, alice),
        h_ab_h: los_channel(l.ab.arrival, bob, l.ab.departure, alice),
        h_ae_h: los_channel(l.ae.arrival, eve, l.ae.departure, alice),
        h_ib_h: los_channel(l.ib.arrival, bob, l.ib.departure, irs),
        h_ie_h: los_channel(l.ie.arrival, eve, l.ie.departure, irs),
        g_aib: g_ai * path_loss(cfg.d_ib, cfg.alpha)?,
        g_aie: g_ai * path_loss(cfg.d_ie, cfg.alpha)?,
        g_ab: path_loss(cfg.d_ab, cfg.alpha)?,
        g_ae: path_loss(cfg.d_ae, cfg.alpha)?,
    })
}
