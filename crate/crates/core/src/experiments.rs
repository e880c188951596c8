//! Baselines, parameter sweeps, figure presets and FLOP-count models.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{build_channels, dbm_to_watts, sigma2_for_snr, ChannelSet, ScenarioConfig};
use crate::error::{Error, Result};
use crate::metrics::{
    effective_channel, eve_beamformers, matched_direction, secrecy_rate, single_stream_report, BeamformingSolution,
    EveStrategy, PhaseShiftVector, RateReport, Side,
};
use crate::numerics::{frobenius, rank_one_principal, svd, ComplexVector, DEFAULT_RANK_TOL};
use crate::opt_gao::{gao_update_rbf, run_gao, ConvergenceTrace, GaoSettings};
use crate::opt_zf::{run_zf, ZfSettings};
use crate::precoding::{an_projection, stack_cm_channel, transmit_design};

/// IRS phases drawn independently and uniformly from `[0, 2π)`.
pub fn random_phase_psm(m: usize, seed: u64) -> PhaseShiftVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    PhaseShiftVector::from_phases(&phases)
}

/// Copy of `ch` with every IRS link zeroed.
pub fn no_irs_channels(ch: &ChannelSet) -> ChannelSet {
    let mut out = ch.clone();
    out.h_ai.fill(num_complex::Complex64::new(0.0, 0.0));
    out.h_ib_h.fill(num_complex::Complex64::new(0.0, 0.0));
    out.h_ie_h.fill(num_complex::Complex64::new(0.0, 0.0));
    out
}

/// FLOP model of the general alternating scheme with `d` iterations.
pub fn flops_gao(d: usize, m: usize, n_a: usize, n_b: usize) -> f64 {
    let (d, m, a, b) = (d as f64, m as f64, n_a as f64, n_b as f64);
    d * (m.powi(3)
        + (2.0 * b + 5.0) * m * m
        + (2.0 * b * a + 2.0 * a + 2.0 * b + 2.0) * m
        + (2.0 * b.powi(3) + 2.0 * b * b + 2.0 * b * a))
}

/// FLOP model of the zero-forcing scheme with `l` iterations.
pub fn flops_zf(l: usize, m: usize, n_b: usize) -> f64 {
    let (l, m, b) = (l as f64, m as f64, n_b as f64);
    l * (m.powi(3) + (2.0 * b + 1.0) * m * m + (2.0 * b.powi(3) + 2.0 * b * b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Gao,
    Zf,
    RandomPhase,
    NoIrs,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Gao, Scheme::Zf, Scheme::RandomPhase, Scheme::NoIrs];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Gao => "GAO",
            Scheme::Zf => "ZF",
            Scheme::RandomPhase => "RandomPhase",
            Scheme::NoIrs => "NoIRS",
        }
    }

    /// Only the random-phase baseline depends on the trial seed.
    pub fn is_randomized(self) -> bool {
        self == Scheme::RandomPhase
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "gao" => Ok(Scheme::Gao),
            "zf" => Ok(Scheme::Zf),
            "randomphase" | "random" => Ok(Scheme::RandomPhase),
            "noirs" => Ok(Scheme::NoIrs),
            _ => Err(Error::invalid(
                "scheme",
                format!("unknown scheme `{s}` (GAO, ZF, RandomPhase, NoIRS)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOptions {
    pub gao: GaoSettings,
    pub zf: ZfSettings,
    /// Base seed of the random-phase baseline; trial `k` uses `seed + k`.
    pub seed: u64,
    /// Replaces each scheme's default Eve model (no effect on NoIRS).
    pub eve: Option<EveStrategy>,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self {
            gao: GaoSettings::default(),
            zf: ZfSettings::default(),
            seed: 1,
            eve: None,
        }
    }
}

impl SchemeOptions {
    /// Eve model used for `scheme`.
    pub fn eve_for(&self, scheme: Scheme) -> EveStrategy {
        match scheme {
            Scheme::NoIrs => EveStrategy::WorstCase,
            Scheme::Zf => self.eve.unwrap_or(self.zf.eve),
            Scheme::Gao => self.eve.unwrap_or(self.gao.eve),
            Scheme::RandomPhase => self.eve.unwrap_or(EveStrategy::WorstCase),
        }
    }
}

/// Receive side of a finished run.
#[derive(Debug, Clone, PartialEq)]
pub enum Receivers {
    TwoStream(BeamformingSolution),
    /// No-IRS baseline: one stream along `v`.
    SingleStream {
        u_b: ComplexVector,
        u_e: ComplexVector,
        v: ComplexVector,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub scheme: Scheme,
    pub report: RateReport,
    pub receivers: Receivers,
    pub trace: Option<ConvergenceTrace>,
    pub iterations_used: usize,
    pub flops_estimate: Option<f64>,
    pub eve: EveStrategy,
}

/// Runs one scheme on one scenario. `trial` only affects the random-phase baseline.
pub fn run_scheme(cfg: &ScenarioConfig, scheme: Scheme, opts: &SchemeOptions, trial: u64) -> Result<SchemeOutcome> {
    let ch = build_channels(cfg)?;
    let eve = opts.eve_for(scheme);
    match scheme {
        Scheme::Gao | Scheme::Zf => {
            let td = transmit_design(&ch)?;
            let (sol, trace) = if scheme == Scheme::Gao {
                run_gao(&ch, &td, cfg, &GaoSettings { eve, ..opts.gao })?
            } else {
                run_zf(&ch, &td, cfg, &ZfSettings { eve, ..opts.zf })?
            };
            let report = secrecy_rate(&ch, &sol, &td, cfg)?;
            let n = trace.iterations_used;
            let flops = if scheme == Scheme::Gao {
                flops_gao(n, cfg.m, cfg.n_a, cfg.n_b)
            } else {
                flops_zf(n, cfg.m, cfg.n_b)
            };
            Ok(SchemeOutcome {
                scheme,
                report,
                receivers: Receivers::TwoStream(sol),
                trace: Some(trace),
                iterations_used: n,
                flops_estimate: Some(flops),
                eve,
            })
        }
        Scheme::RandomPhase => {
            let td = transmit_design(&ch)?;
            let theta = random_phase_psm(cfg.m, opts.seed.wrapping_add(trial));
            let (u_b1, u_b2) = gao_update_rbf(&ch, &theta, &td, cfg)?;
            let (u_e1, u_e2) = eve_beamformers(&ch, &theta, &td, eve)?;
            let sol = BeamformingSolution {
                u_b1,
                u_b2,
                u_e1,
                u_e2,
                theta,
            };
            let report = secrecy_rate(&ch, &sol, &td, cfg)?;
            Ok(SchemeOutcome {
                scheme,
                report,
                receivers: Receivers::TwoStream(sol),
                trace: None,
                iterations_used: 1,
                flops_estimate: None,
                eve,
            })
        }
        Scheme::NoIrs => run_no_irs(&ch, cfg),
    }
}

/// Without the IRS the stacked channel has rank one, so a single stream
/// carries the combined CM power `(β₁+β₂)Ps`.
fn run_no_irs(ch: &ChannelSet, cfg: &ScenarioConfig) -> Result<SchemeOutcome> {
    let ch0 = no_irs_channels(ch);
    let h_cm = stack_cm_channel(&ch0);
    let d = svd(&h_cm)?;
    if d.rank(DEFAULT_RANK_TOL) == 0 {
        return Err(Error::DegenerateGeometry("direct channel vanishes".into()));
    }
    let v: ComplexVector = d.v.column(0).into_owned();
    let p_an = an_projection(&h_cm, DEFAULT_RANK_TOL);
    let theta = PhaseShiftVector::ones(cfg.m);
    let h_b = effective_channel(&ch0, &theta, Side::Bob);
    let u_b = matched_direction(&(&h_b * &v), frobenius(&h_b), "Bob direct path")?;
    let h_e = effective_channel(&ch0, &theta, Side::Eve);
    // Eve sees nothing along v: any unit vector gives the same (zero) rate.
    let u_e = rank_one_principal(&(&h_e * &v)).map(|(_, u)| u).unwrap_or_else(|| {
        let mut e = ComplexVector::zeros(cfg.n_e);
        e[0] = num_complex::Complex64::new(1.0, 0.0);
        e
    });
    let report = single_stream_report(&ch0, &theta, &u_b, &u_e, &v, &p_an, cfg)?;
    Ok(SchemeOutcome {
        scheme: Scheme::NoIrs,
        report,
        receivers: Receivers::SingleStream { u_b, u_e, v },
        trace: None,
        iterations_used: 0,
        flops_estimate: None,
        eve: EveStrategy::WorstCase,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    /// Transmit power in dBm; σ² stays fixed.
    PsDbm,
    /// Number of IRS elements.
    M,
    /// `Ps/σ²` in dB; sets σ².
    SnrDb,
    /// Departure angle from Alice towards Eve, radians.
    ThetaAe,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::PsDbm => "ps_dbm",
            SweepVariable::M => "m",
            SweepVariable::SnrDb => "snr_db",
            SweepVariable::ThetaAe => "theta_ae",
        }
    }

    /// `base` with this variable set to `value`, validated.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = base.clone();
        match self {
            SweepVariable::PsDbm => cfg.ps = dbm_to_watts(value),
            SweepVariable::M => {
                if value.is_nan() || value < 1.0 || value.fract() != 0.0 || value > u32::MAX as f64 {
                    return Err(Error::invalid("m", format!("must be a positive integer, got {value}")));
                }
                cfg.m = value as usize;
            }
            SweepVariable::SnrDb => cfg.sigma2 = sigma2_for_snr(cfg.ps, value),
            SweepVariable::ThetaAe => cfg.links.ae.departure = value,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ps_dbm" | "ps" => Ok(SweepVariable::PsDbm),
            "m" => Ok(SweepVariable::M),
            "snr_db" | "snr" => Ok(SweepVariable::SnrDb),
            "theta_ae" => Ok(SweepVariable::ThetaAe),
            _ => Err(Error::invalid(
                "variable",
                format!("unknown sweep variable `{s}` (ps_dbm, m, snr_db, theta_ae)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    /// Repetitions of randomized schemes; deterministic schemes run once.
    pub trials: usize,
    pub options: SchemeOptions,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, values: Vec<f64>, schemes: Vec<Scheme>) -> Self {
        Self {
            variable,
            values,
            schemes,
            trials: 1,
            options: SchemeOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("values", "sweep needs at least one value"));
        }
        if self.schemes.is_empty() {
            return Err(Error::invalid("schemes", "sweep needs at least one scheme"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        self.options.gao.validate()?;
        self.options.zf.validate()
    }

    /// One validated scenario per value.
    pub fn scenarios(&self, base: &ScenarioConfig) -> Result<Vec<ScenarioConfig>> {
        self.values.iter().map(|&v| self.variable.apply(base, v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub variable: SweepVariable,
    pub value: f64,
    pub trial: usize,
    /// NaN when `error` is set.
    pub r_b: f64,
    pub r_e: f64,
    pub r_s: f64,
    pub rps: f64,
    pub iterations_used: usize,
    pub flops_estimate: Option<f64>,
    pub eve: EveStrategy,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Runs every (scheme, value, trial) job in parallel on the current rayon
/// pool. Rows come back ordered by scheme, then value index, then trial.
/// Failed runs produce rows with `error` set.
pub fn run_sweep(base: &ScenarioConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    base.validate()?;
    let scenarios = spec.scenarios(base)?;
    let mut schemes = spec.schemes.clone();
    schemes.sort();
    schemes.dedup();

    let mut jobs = Vec::new();
    for &scheme in &schemes {
        let trials = if scheme.is_randomized() { spec.trials } else { 1 };
        for vi in 0..scenarios.len() {
            for trial in 0..trials {
                jobs.push((scheme, vi, trial));
            }
        }
    }

    let rows = jobs
        .into_par_iter()
        .map(|(scheme, vi, trial)| {
            let value = spec.values[vi];
            let eve = spec.options.eve_for(scheme);
            match run_scheme(&scenarios[vi], scheme, &spec.options, trial as u64) {
                Ok(out) => SweepRow {
                    scheme,
                    variable: spec.variable,
                    value,
                    trial,
                    r_b: out.report.r_b,
                    r_e: out.report.r_e,
                    r_s: out.report.r_s,
                    rps: out.report.rps,
                    iterations_used: out.iterations_used,
                    flops_estimate: out.flops_estimate,
                    eve: out.eve,
                    error: None,
                },
                Err(e) => {
                    warn!("{scheme} at {}={value} trial {trial} failed: {e}", spec.variable);
                    SweepRow {
                        scheme,
                        variable: spec.variable,
                        value,
                        trial,
                        r_b: f64::NAN,
                        r_e: f64::NAN,
                        r_s: f64::NAN,
                        rps: f64::NAN,
                        iterations_used: 0,
                        flops_estimate: None,
                        eve,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    Ok(rows)
}

/// Mean `r_s` of the successful rows of `scheme` at `value`.
pub fn mean_r_s(rows: &[SweepRow], scheme: Scheme, value: f64) -> Option<f64> {
    let xs: Vec<f64> = rows
        .iter()
        .filter(|r| r.scheme == scheme && r.value == value && r.is_ok())
        .map(|r| r.r_s)
        .collect();
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Per-value ratio `mean r_s(a) / mean r_s(b)`.
pub fn improvement_ratios(rows: &[SweepRow], values: &[f64], a: Scheme, b: Scheme) -> Vec<(f64, Option<f64>)> {
    values
        .iter()
        .map(|&v| {
            let ratio = match (mean_r_s(rows, a, v), mean_r_s(rows, b, v)) {
                (Some(x), Some(y)) if y > 0.0 => Some(x / y),
                _ => None,
            };
            (v, ratio)
        })
        .collect()
}

/// Figure presets.
pub mod presets {
    use super::*;

    pub const FIG2_M: [usize; 2] = [20, 200];
    pub const FIG3_PS_DBM: [f64; 5] = [20.0, 25.0, 30.0, 35.0, 40.0];
    pub const FIG4_M: [f64; 5] = [40.0, 80.0, 120.0, 160.0, 200.0];
    pub const FIG5_SNR_DB: [f64; 3] = [0.0, 10.0, 20.0];
    /// Grid step of the Eve-angle sweep; index 11 is the Bob direction.
    pub const FIG6_STEP: f64 = PI / 36.0;
    pub const FIG6_POINTS: usize = 72;

    pub fn fig3(options: SchemeOptions) -> SweepSpec {
        SweepSpec {
            options,
            ..SweepSpec::new(SweepVariable::PsDbm, FIG3_PS_DBM.to_vec(), Scheme::ALL.to_vec())
        }
    }

    pub fn fig4(options: SchemeOptions) -> SweepSpec {
        SweepSpec {
            options,
            ..SweepSpec::new(SweepVariable::M, FIG4_M.to_vec(), Scheme::ALL.to_vec())
        }
    }

    /// M sweep of the two optimizers for one SNR.
    pub fn fig5(options: SchemeOptions) -> SweepSpec {
        SweepSpec {
            options,
            ..SweepSpec::new(SweepVariable::M, FIG4_M.to_vec(), vec![Scheme::Gao, Scheme::Zf])
        }
    }

    /// Scenario of the Eve-angle figure.
    pub fn fig6_base(base: &ScenarioConfig) -> ScenarioConfig {
        let mut cfg = base.clone();
        cfg.links.ai.departure = PI / 12.0;
        cfg.d_ab = 100.0;
        cfg.d_ae = 100.0;
        cfg
    }

    pub fn fig6_values() -> Vec<f64> {
        (0..FIG6_POINTS).map(|k| k as f64 * FIG6_STEP).collect()
    }

    pub fn fig6(options: SchemeOptions) -> SweepSpec {
        SweepSpec {
            options,
            ..SweepSpec::new(SweepVariable::ThetaAe, fig6_values(), Scheme::ALL.to_vec())
        }
    }

    /// Rows of the fig5 sweep tagged with their SNR in dB.
    pub fn fig5_rows(base: &ScenarioConfig, options: SchemeOptions) -> Result<Vec<(f64, SweepRow)>> {
        let mut out = Vec::new();
        for snr in FIG5_SNR_DB {
            let cfg = SweepVariable::SnrDb.apply(base, snr)?;
            for row in run_sweep(&cfg, &fig5(options))? {
                out.push((snr, row));
            }
        }
        Ok(out)
    }

    /// One point of a convergence trace.
    #[derive(Debug, Clone, PartialEq)]
    pub struct TracePoint {
        pub scheme: Scheme,
        pub m: usize,
        pub iteration: usize,
        pub rps: f64,
        pub r_s: f64,
    }

    /// Convergence traces of both optimizers at each M of [`FIG2_M`].
    pub fn fig2_traces(base: &ScenarioConfig, options: SchemeOptions) -> Result<Vec<TracePoint>> {
        let jobs: Vec<(Scheme, usize)> = [Scheme::Gao, Scheme::Zf]
            .iter()
            .flat_map(|&s| FIG2_M.iter().map(move |&m| (s, m)))
            .collect();
        let traces: Vec<Result<Vec<TracePoint>>> = jobs
            .into_par_iter()
            .map(|(scheme, m)| {
                let cfg = SweepVariable::M.apply(base, m as f64)?;
                let out = run_scheme(&cfg, scheme, &options, 0)?;
                let trace = out.trace.expect("optimizers record a trace");
                Ok(trace
                    .records
                    .iter()
                    .map(|r| TracePoint {
                        scheme,
                        m,
                        iteration: r.iteration,
                        rps: r.rps,
                        r_s: r.r_s,
                    })
                    .collect())
            })
            .collect();
        let mut out = Vec::new();
        for t in traces {
            out.extend(t?);
        }
        Ok(out)
    }
}
