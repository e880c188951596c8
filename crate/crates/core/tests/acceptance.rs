//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::panic;
use std::time::Instant;

use irsdm_core::channel::{build_channels, ChannelSet, LinkAngles, Links, ScenarioConfig};
use irsdm_core::experiments::{flops_gao, flops_zf, mean_r_s, presets, run_sweep, Scheme, SchemeOptions, SweepRow};
use irsdm_core::metrics::{
    effective_channel, gain_2x2, rate_bob, rate_eve, receive_power_sum, BeamformingSolution, PhaseShiftVector, Side,
};
use irsdm_core::numerics::{frobenius, inner, vec_norm, ComplexMatrix, ComplexVector, DEFAULT_RANK_TOL};
use irsdm_core::opt_gao::{gao_theta_terms, gao_update_rbf, gao_update_theta, run_gao, GaoSettings};
use irsdm_core::opt_zf::{run_zf, zf_update_rbf, zf_update_theta, ZfSettings};
use irsdm_core::precoding::{an_projection, cm_rank, stack_cm_channel, transmit_design, TransmitDesign};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twofloat::TwoFloat;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn angle(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.1..PI - 0.1)
}

fn random_config(rng: &mut ChaCha8Rng, m: usize) -> ScenarioConfig {
    let mut link = || LinkAngles::new(angle(rng), angle(rng));
    let links = Links {
        ai: link(),
        ab: link(),
        ae: link(),
        ib: link(),
        ie: link(),
    };
    let b3 = rng.random_range(0.05..0.4);
    let b1 = rng.random_range(0.2..0.8) * (1.0 - b3);
    ScenarioConfig {
        n_a: rng.random_range(4..=20),
        n_b: rng.random_range(2..=6),
        n_e: rng.random_range(2..=6),
        m,
        links,
        d_ai: rng.random_range(5.0..30.0),
        d_ab: rng.random_range(20.0..100.0),
        d_ae: rng.random_range(20.0..100.0),
        d_ib: rng.random_range(10.0..60.0),
        d_ie: rng.random_range(10.0..60.0),
        ps: rng.random_range(0.1..10.0),
        beta1: b1,
        beta2: 1.0 - b3 - b1,
        beta3: b3,
        sigma2: 10f64.powf(rng.random_range(-10.0..-6.0)),
        ..ScenarioConfig::default()
    }
}

/// Random scenario whose transmit design exists (two CM streams supported).
fn random_instance(rng: &mut ChaCha8Rng, m: usize) -> (ScenarioConfig, ChannelSet, TransmitDesign) {
    loop {
        let cfg = random_config(rng, m);
        let ch = build_channels(&cfg).expect("random config is valid");
        if let Ok(td) = transmit_design(&ch) {
            return (cfg, ch, td);
        }
    }
}

fn random_theta(rng: &mut ChaCha8Rng, m: usize) -> PhaseShiftVector {
    let ph: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    PhaseShiftVector::from_phases(&ph)
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
    let v = ComplexVector::from_fn(n, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let n = vec_norm(&v);
    v.unscale(n)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = rng.random_range(2..=120);
        let cfg = random_config(&mut rng, m);
        let ch = build_channels(&cfg).unwrap();
        let h_cm = stack_cm_channel(&ch);
        let p = an_projection(&h_cm, DEFAULT_RANK_TOL);
        let a = frobenius(&(&ch.h_ai * &p));
        let b = frobenius(&(&ch.h_ab_h * &p));
        worst = worst.max(a).max(b);
        check(a <= 1e-9 && b <= 1e-9, format!("nulling residual {a:.3e} / {b:.3e}"))?;
        let tr: Complex64 = p.diagonal().iter().sum();
        let expected = (cfg.n_a - cm_rank(&h_cm, DEFAULT_RANK_TOL)) as f64;
        check(
            (tr.re - expected).abs() <= 1e-9,
            format!("trace {} vs {expected}", tr.re),
        )?;
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 5.0, format!("took {secs:.2}s"))?;
    Ok(format!("max residual {worst:.2e}, {secs:.2}s"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = rng.random_range(2..=120);
        let (cfg, ch, td) = random_instance(&mut rng, m);
        let theta = random_theta(&mut rng, m);
        let (u1, u2) = gao_update_rbf(&ch, &theta, &td, &cfg).map_err(|e| e.to_string())?;
        let h_b = effective_channel(&ch, &theta, Side::Bob);
        for (u, v) in [(&u1, &td.v1), (&u2, &td.v2)] {
            let x = &h_b * v;
            let x = x.unscale(vec_norm(&x));
            let ip = inner(u, &x);
            let dev = vec_norm(&(u * (ip / ip.norm()) - &x));
            worst = worst.max(dev);
        }
    }
    check(worst <= 1e-8, format!("deviation {worst:.3e}"))?;
    Ok(format!("max deviation {worst:.2e}"))
}

fn grid_max(m_eval: impl Fn(&PhaseShiftVector) -> f64) -> f64 {
    let step = 2.0 * PI / 64.0;
    let mut best = f64::NEG_INFINITY;
    for a in 0..64 {
        for b in 0..64 {
            let th = PhaseShiftVector::from_phases(&[a as f64 * step, b as f64 * step]);
            best = best.max(m_eval(&th));
        }
    }
    best
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut gao_worst = f64::INFINITY;
    let mut zf_worst = f64::INFINITY;
    for _ in 0..50 {
        let (cfg, ch, td) = random_instance(&mut rng, 2);
        let prev = random_theta(&mut rng, 2);

        let (u1, u2) = gao_update_rbf(&ch, &prev, &td, &cfg).map_err(|e| e.to_string())?;
        let rps = |th: &PhaseShiftVector| {
            let sol = BeamformingSolution {
                u_b1: u1.clone(),
                u_b2: u2.clone(),
                u_e1: u1.clone(),
                u_e2: u2.clone(),
                theta: th.clone(),
            };
            receive_power_sum(&ch, &sol, &td, &cfg)
        };
        let terms = gao_theta_terms(&ch, &u1, &u2, &td, &cfg);
        let up = gao_update_theta(&terms, &prev, true, rps).map_err(|e| e.to_string())?;
        gao_worst = gao_worst.min(rps(&up.theta) / grid_max(rps));

        let zs = ZfSettings::default();
        let (z1, z2) = match zf_update_rbf(&ch, &prev, &td, &cfg, &zs) {
            Ok(u) => u,
            Err(e) => return Err(format!("zero-forcing beamformers: {e}")),
        };
        let zrps = |th: &PhaseShiftVector| {
            let sol = BeamformingSolution {
                u_b1: z1.clone(),
                u_b2: z2.clone(),
                u_e1: z1.clone(),
                u_e2: z2.clone(),
                theta: th.clone(),
            };
            receive_power_sum(&ch, &sol, &td, &cfg)
        };
        let th = zf_update_theta(&ch, &z1, &td, &cfg, &prev).map_err(|e| e.to_string())?;
        zf_worst = zf_worst.min(zrps(&th) / grid_max(zrps));
    }
    let secs = start.elapsed().as_secs_f64();
    check(gao_worst >= 0.98, format!("GAO ratio {gao_worst:.6}"))?;
    // rounding of two equal optima may differ in the last bits
    check(zf_worst >= 1.0 - 1e-12, format!("ZF ratio {zf_worst:.15}"))?;
    check(secs < 30.0, format!("took {secs:.2}s"))?;
    Ok(format!(
        "worst GAO/grid {gao_worst:.6}, worst ZF/grid {zf_worst:.12}, {secs:.2}s"
    ))
}

fn criterion_4() -> Outcome {
    let cfg = ScenarioConfig {
        m: 200,
        ..ScenarioConfig::default()
    };
    let ch = build_channels(&cfg).unwrap();
    let td = transmit_design(&ch).map_err(|e| e.to_string())?;
    let (_, g) = run_gao(&ch, &td, &cfg, &GaoSettings::default()).map_err(|e| e.to_string())?;
    let (_, z) = run_zf(&ch, &td, &cfg, &ZfSettings::default()).map_err(|e| e.to_string())?;
    check(
        g.converged && g.iterations_used <= 10,
        format!("GAO used {} iterations", g.iterations_used),
    )?;
    check(
        z.converged && z.iterations_used <= 5,
        format!("ZF used {} iterations", z.iterations_used),
    )?;
    check(z.iterations_used <= g.iterations_used, "ZF slower than GAO")?;
    check(
        g.is_non_decreasing(1e-12),
        format!("GAO trace decreases: {:?}", g.rps()),
    )?;
    check(z.is_non_decreasing(1e-12), format!("ZF trace decreases: {:?}", z.rps()))?;
    Ok(format!(
        "GAO {} iterations, ZF {} iterations",
        g.iterations_used, z.iterations_used
    ))
}

fn r_s_at(rows: &[SweepRow], scheme: Scheme, value: f64) -> Result<f64, String> {
    mean_r_s(rows, scheme, value).ok_or_else(|| {
        let err = rows
            .iter()
            .find(|r| r.scheme == scheme && r.value == value)
            .and_then(|r| r.error.clone())
            .unwrap_or_default();
        format!("{scheme} failed at {value}: {err}")
    })
}

fn criterion_5() -> Outcome {
    let base = ScenarioConfig::default();
    let opts = SchemeOptions::default();
    let mut notes = Vec::new();
    for spec in [presets::fig3(opts), presets::fig4(opts)] {
        let rows = run_sweep(&base, &spec).map_err(|e| e.to_string())?;
        for &v in &spec.values {
            let gao = r_s_at(&rows, Scheme::Gao, v)?;
            let zf = r_s_at(&rows, Scheme::Zf, v)?;
            let rnd = r_s_at(&rows, Scheme::RandomPhase, v)?;
            let nirs = r_s_at(&rows, Scheme::NoIrs, v)?;
            let at = format!("{}={v}", spec.variable);
            check(gao >= rnd, format!("GAO {gao} < RandomPhase {rnd} at {at}"))?;
            check(zf >= rnd, format!("ZF {zf} < RandomPhase {rnd} at {at}"))?;
            check(gao >= nirs, format!("GAO {gao} < NoIRS {nirs} at {at}"))?;
            if spec.variable.name() == "m" && v == 40.0 {
                let (rg, rz) = (gao / rnd, zf / rnd);
                notes.push(format!("M=40 GAO/Random {rg:.3}, ZF/Random {rz:.3}"));
                check(rg >= 1.3, format!("GAO improvement {rg:.3} < 1.3 at M=40"))?;
                check(rz >= 1.3, format!("ZF improvement {rz:.3} < 1.3 at M=40"))?;
            }
        }
    }
    Ok(notes.join("; "))
}

fn criterion_6() -> Outcome {
    let rows = presets::fig5_rows(&ScenarioConfig::default(), SchemeOptions::default()).map_err(|e| e.to_string())?;
    let gap = |snr: f64| -> Result<f64, String> {
        let mut total = 0.0;
        for v in presets::FIG4_M {
            let sel: Vec<SweepRow> = rows.iter().filter(|(s, _)| *s == snr).map(|(_, r)| r.clone()).collect();
            total += r_s_at(&sel, Scheme::Gao, v)? - r_s_at(&sel, Scheme::Zf, v)?;
        }
        Ok(total / presets::FIG4_M.len() as f64)
    };
    let (g0, g20) = (gap(0.0)?, gap(20.0)?);
    check(g20 > g0, format!("gap at 20 dB {g20:.3e} <= gap at 0 dB {g0:.3e}"))?;
    Ok(format!("mean GAO-ZF gap {g0:.3e} at 0 dB, {g20:.3e} at 20 dB"))
}

fn criterion_7() -> Outcome {
    let base = presets::fig6_base(&ScenarioConfig::default());
    let spec = presets::fig6(SchemeOptions::default());
    let rows = run_sweep(&base, &spec).map_err(|e| e.to_string())?;
    let vals = &spec.values;
    let dip = 11;
    let mut at_dip = Vec::new();
    let mut worst_sym: f64 = 0.0;
    let mut undefined = 0;
    for scheme in Scheme::ALL {
        // None where the run reported a degenerate configuration
        let curve: Vec<Option<f64>> = vals.iter().map(|&v| mean_r_s(&rows, scheme, v)).collect();
        let point = |k: usize| curve[k].ok_or_else(|| r_s_at(&rows, scheme, vals[k]).unwrap_err());
        let (left, mid, right) = (point(dip - 1)?, point(dip)?, point(dip + 1)?);
        check(
            mid < left && mid < right,
            format!("{scheme}: no dip ({left:.4}, {mid:.4}, {right:.4})"),
        )?;
        at_dip.push((scheme, mid));
        let n = curve.len();
        for k in 1..n / 2 {
            match (curve[k], curve[n - k]) {
                (Some(a), Some(b)) => worst_sym = worst_sym.max((a - b).abs()),
                (None, None) => undefined += 1,
                _ => return Err(format!("{scheme}: only one of k={k} and k={} is defined", n - k)),
            }
        }
    }
    let gao = at_dip[0].1;
    let best_other = at_dip[1..].iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    // GAO and ZF reach the same optimum here; count GAO as highest when tied
    check(
        gao >= best_other - 1e-9 * best_other.abs(),
        format!("GAO {gao} below {best_other} at the dip"),
    )?;
    check(worst_sym <= 1e-6, format!("asymmetry {worst_sym:.3e}"))?;
    let dips: Vec<String> = at_dip.iter().map(|(s, r)| format!("{s} {r:.3}")).collect();
    Ok(format!(
        "dip R_s: {}; asymmetry {worst_sym:.1e}; {undefined} mirrored pairs undefined",
        dips.join(", ")
    ))
}

fn criterion_8() -> Outcome {
    check(flops_gao(1, 1, 1, 1) == 22.0, "flops_gao(1,1,1,1) != 22")?;
    check(flops_zf(1, 1, 1) == 8.0, "flops_zf(1,1,1) != 8")?;
    check(
        flops_gao(6, 200, 16, 4) == 6.0 * (8_000_000.0 + 520_000.0 + 34_000.0 + 288.0),
        "flops_gao(6,200,16,4) mismatch",
    )?;
    for m in [40, 80, 120, 160, 200] {
        let (z, g) = (flops_zf(3, m, 4), flops_gao(6, m, 16, 4));
        check(z < g, format!("M={m}: ZF {z} >= GAO {g}"))?;
    }
    Ok(format!(
        "M=200: ZF {:.3e} vs GAO {:.3e}",
        flops_zf(3, 200, 4),
        flops_gao(6, 200, 16, 4)
    ))
}

/// Complex double-double scalar for the direct rate evaluation. The noise
/// covariance seen through nearly parallel combiners (or a rank-one AN term
/// over a tiny σ²) is too ill-conditioned for a plain f64 determinant.
#[derive(Clone, Copy)]
struct Dd {
    re: TwoFloat,
    im: TwoFloat,
}

impl Dd {
    fn new(z: Complex64) -> Self {
        Self {
            re: TwoFloat::from(z.re),
            im: TwoFloat::from(z.im),
        }
    }

    fn zero() -> Self {
        Self::new(Complex64::new(0.0, 0.0))
    }

    fn conj(self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }

    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }

    fn sub(self, o: Self) -> Self {
        Self {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }

    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    fn scale(self, x: f64) -> Self {
        self.mul(Self::new(Complex64::new(x, 0.0)))
    }
}

type DdMat = Vec<Vec<Dd>>;

fn dd_mat(a: &ComplexMatrix) -> DdMat {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| Dd::new(a[(i, j)])).collect())
        .collect()
}

fn dd_vec(v: &ComplexVector) -> Vec<Dd> {
    v.iter().map(|&z| Dd::new(z)).collect()
}

fn dd_matvec(a: &DdMat, x: &[Dd]) -> Vec<Dd> {
    a.iter()
        .map(|row| row.iter().zip(x).fold(Dd::zero(), |acc, (&r, &y)| acc.add(r.mul(y))))
        .collect()
}

fn dd_matmul(a: &DdMat, b: &DdMat) -> DdMat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).fold(Dd::zero(), |acc, l| acc.add(a[i][l].mul(b[l][j]))))
                .collect()
        })
        .collect()
}

/// `x^H A y`
fn dd_form(x: &[Dd], a: &DdMat, y: &[Dd]) -> Dd {
    let ay = dd_matvec(a, y);
    x.iter()
        .zip(&ay)
        .fold(Dd::zero(), |acc, (&xi, &v)| acc.add(xi.conj().mul(v)))
}

/// Received-signal rate `log2 det(I + S N^{-1})` from the full covariances:
/// `S = H (β₁Ps v1 v1^H + β₂Ps v2 v2^H) H^H`, `N = σ² I + β₃Ps H P P^H H^H`,
/// both seen through `U = [u1 u2]`. Uses `det(I + S N^{-1}) = det(N + S) / det(N)`.
fn direct_rate(
    h: &ComplexMatrix,
    u1: &ComplexVector,
    u2: &ComplexVector,
    td: &TransmitDesign,
    cfg: &ScenarioConfig,
) -> f64 {
    let n = h.nrows();
    let hd = dd_mat(h);
    let a1 = dd_matvec(&hd, &dd_vec(&td.v1));
    let a2 = dd_matvec(&hd, &dd_vec(&td.v2));
    let hp = dd_matmul(&hd, &dd_mat(&td.p_an));
    let mut s: DdMat = vec![vec![Dd::zero(); n]; n];
    let mut c: DdMat = vec![vec![Dd::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            s[i][j] = a1[i]
                .mul(a1[j].conj())
                .scale(cfg.beta1 * cfg.ps)
                .add(a2[i].mul(a2[j].conj()).scale(cfg.beta2 * cfg.ps));
            let an = hp[i]
                .iter()
                .zip(&hp[j])
                .fold(Dd::zero(), |acc, (&x, &y)| acc.add(x.mul(y.conj())));
            c[i][j] = an.scale(cfg.beta3 * cfg.ps);
        }
        c[i][i] = c[i][i].add(Dd::new(Complex64::new(cfg.sigma2, 0.0)));
    }
    let u = [dd_vec(u1), dd_vec(u2)];
    let form2 = |m: &DdMat| -> [[Dd; 2]; 2] {
        [
            [dd_form(&u[0], m, &u[0]), dd_form(&u[0], m, &u[1])],
            [dd_form(&u[1], m, &u[0]), dd_form(&u[1], m, &u[1])],
        ]
    };
    let sg = form2(&s);
    let nn = form2(&c);
    let det = |m: [[Dd; 2]; 2]| m[0][0].mul(m[1][1]).sub(m[0][1].mul(m[1][0]));
    let sum = [
        [nn[0][0].add(sg[0][0]), nn[0][1].add(sg[0][1])],
        [nn[1][0].add(sg[1][0]), nn[1][1].add(sg[1][1])],
    ];
    let d_n = det(nn);
    let excess = det(sum).sub(d_n).re / d_n.re;
    f64::from(excess).ln_1p() / std::f64::consts::LN_2
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let m = rng.random_range(2..=120);
        let (cfg, ch, td) = random_instance(&mut rng, m);
        let theta = random_theta(&mut rng, m);
        let (ub1, ub2, ue1, ue2) = if i % 2 == 0 {
            let (a, b) = gao_update_rbf(&ch, &theta, &td, &cfg).map_err(|e| e.to_string())?;
            let h_e = effective_channel(&ch, &theta, Side::Eve);
            let c = (&h_e * &td.v1).normalize();
            let d = (&h_e * &td.v2).normalize();
            (a, b, c, d)
        } else {
            (
                random_unit(&mut rng, cfg.n_b),
                random_unit(&mut rng, cfg.n_b),
                random_unit(&mut rng, cfg.n_e),
                random_unit(&mut rng, cfg.n_e),
            )
        };
        let h_b = effective_channel(&ch, &theta, Side::Bob);
        let h_e = effective_channel(&ch, &theta, Side::Eve);
        let gb = gain_2x2(&h_b, &ub1, &ub2, &td.v1, &td.v2, cfg.beta1, cfg.beta2, cfg.ps);
        let ge = gain_2x2(&h_e, &ue1, &ue2, &td.v1, &td.v2, cfg.beta1, cfg.beta2, cfg.ps);
        let rb = rate_bob(&gb, &ub1, &ub2, cfg.sigma2).map_err(|e| e.to_string())?;
        let re = rate_eve(&ge, &ue1, &ue2, &ch, &td.p_an, cfg.beta3, cfg.ps, cfg.sigma2).map_err(|e| e.to_string())?;
        for (fast, slow) in [
            (rb, direct_rate(&h_b, &ub1, &ub2, &td, &cfg)),
            (re, direct_rate(&h_e, &ue1, &ue2, &td, &cfg)),
        ] {
            let rel = (fast - slow).abs() / slow.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
        }
    }
    check(worst <= 1e-8, format!("relative deviation {worst:.3e}"))?;
    Ok(format!("max relative deviation {worst:.2e}"))
}

fn criterion_10() -> Outcome {
    let base = ScenarioConfig::default();
    let opts = SchemeOptions::default();
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for spec in [presets::fig3(opts), presets::fig4(opts)] {
        for cfg in spec.scenarios(&base).map_err(|e| e.to_string())? {
            let ch = build_channels(&cfg).unwrap();
            let td = transmit_design(&ch).map_err(|e| e.to_string())?;
            let (_, trace) = run_zf(&ch, &td, &cfg, &ZfSettings::default()).map_err(|e| e.to_string())?;
            for r in &trace.records {
                worst = worst.max(r.stream_leakage.ok_or("leakage not recorded")?);
            }
            runs += 1;
        }
    }
    check(worst <= 1e-8, format!("leakage {worst:.3e}"))?;
    Ok(format!("{runs} runs, max leakage {worst:.2e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("AN nulling", criterion_1),
        ("rank-one receive beamformer", criterion_2),
        ("phase update vs grid search", criterion_3),
        ("convergence", criterion_4),
        ("scheme ordering", criterion_5),
        ("SNR gap growth", criterion_6),
        ("Eve-alignment dip", criterion_7),
        ("complexity formulas", criterion_8),
        ("rate cross-check", criterion_9),
        ("ZF stream separation", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(f).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1)
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
