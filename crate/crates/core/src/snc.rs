//! Delay-violation bounds from Mellin transforms of the SNR-domain arrival
//! and service processes.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::attacks::NkPmf;
use crate::channel::SnrMoments;
use crate::error::{domain, Error, Result};
use crate::par;
use crate::pla::golden_section_min;
use crate::quad::ln_integrate_semi_infinite;
use crate::specfun::{ln_gamma, ln_upper_gamma_ladder, RealTolerance};

/// Scaled χ² approximation γ ≈ α_g·X with X ~ χ²_{k_g}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaApproxParams {
    pub alpha_g: f64,
    pub k_g: f64,
}

impl GammaApproxParams {
    pub fn new(alpha_g: f64, k_g: f64) -> Result<Self> {
        if !(alpha_g > 0.0 && alpha_g.is_finite() && k_g > 0.0 && k_g.is_finite()) {
            return Err(domain("GammaApproxParams", format!("need α_g, k_g > 0 (got {alpha_g}, {k_g})")));
        }
        Ok(Self { alpha_g, k_g })
    }
}

/// Which mean enters the moment match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMatching {
    /// Match E[γ] and Var[γ].
    #[default]
    Moments,
    /// Use 1 + E[γ] in place of E[γ] in both parameters.
    TheoremVariant,
}

/// α_g = Var/(2E), k_g = 2E²/Var.
pub fn gamma_approx_params(moments: SnrMoments) -> Result<GammaApproxParams> {
    gamma_approx_params_with(moments, MomentMatching::Moments)
}

pub fn gamma_approx_params_with(moments: SnrMoments, matching: MomentMatching) -> Result<GammaApproxParams> {
    let SnrMoments { mean, var } = moments;
    if !(mean > 0.0) {
        return Err(domain("gamma_approx_params", format!("mean SNR {mean} must be > 0")));
    }
    if var == 0.0 {
        return Err(Error::DegenerateService(
            "zero SNR variance; use the deterministic SNR law".into(),
        ));
    }
    if !(var > 0.0) {
        return Err(domain("gamma_approx_params", format!("variance {var} must be > 0")));
    }
    let e = match matching {
        MomentMatching::Moments => mean,
        MomentMatching::TheoremVariant => 1.0 + mean,
    };
    GammaApproxParams::new(var / (2.0 * e), 2.0 * e * e / var)
}

/// Mellin transform of g = 1 + α_g X, X ~ χ²_{k_g}, by its incomplete-gamma
/// series.
///
/// The terms are combined in log form. The result is rejected with a
/// precision error when the alternating terms cancel too much of the sum,
/// which happens for strongly negative `s`; [`mellin_g_oracle`] handles
/// those arguments.
pub fn mellin_g(s: f64, params: GammaApproxParams, tol: RealTolerance) -> Result<f64> {
    Ok(mellin_g_series(s, params, tol)?.value)
}

/// Series value with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEval {
    pub value: f64,
    pub terms: usize,
    /// ln(max |term| / |sum|).
    pub cancellation: f64,
}

const EXACT_TERMINATION: f64 = 1e-12;
const STOP_RUN: usize = 3;
const LADDER_CHUNK: usize = 64;

pub fn mellin_g_series(s: f64, params: GammaApproxParams, tol: RealTolerance) -> Result<SeriesEval> {
    if !s.is_finite() {
        return Err(domain("mellin_g", format!("s = {s}")));
    }
    let GammaApproxParams { alpha_g, k_g } = params;
    let kp = 0.5 * (k_g - 2.0);
    let two_a = 2.0 * alpha_g;
    let x0 = 1.0 / two_a;
    let ln_two_a = two_a.ln();
    let a0 = s + kp;
    let terminates = kp >= -EXACT_TERMINATION && (kp - kp.round()).abs() < EXACT_TERMINATION;
    let max_terms = if terminates {
        kp.round() as usize + 1
    } else {
        tol.max_terms()
    };

    let mut ladder = ln_upper_gamma_ladder(a0, x0, max_terms.min(LADDER_CHUNK))?;
    let mut ln_c = 0.0;
    let mut sign_c = 1.0;
    let mut reference = f64::NAN;
    let mut sum = 0.0;
    let mut max_lt = f64::NEG_INFINITY;
    let mut small_run = 0;
    let mut converged = terminates;
    let mut m = 0;
    while m < max_terms {
        if m == ladder.len() {
            ladder = ln_upper_gamma_ladder(a0, x0, max_terms)?;
        }
        let lt = ln_c - m as f64 * ln_two_a + ladder[m];
        let sign = if m % 2 == 0 { sign_c } else { -sign_c };
        if reference.is_nan() {
            reference = lt;
        } else if lt > reference + 30.0 {
            sum *= (reference - lt).exp();
            reference = lt;
        }
        let term = sign * (lt - reference).exp();
        sum += term;
        max_lt = max_lt.max(lt);
        m += 1;

        if !terminates {
            // Late terms fall off like m^{−k′−2}; the tail after m terms is
            // about m/(k′+1) times the last one.
            let tail = (m as f64 / (kp + 1.0).max(1.0)).max(1.0);
            if term.abs() * tail < tol.rel_tol() * sum.abs() {
                small_run += 1;
                if small_run >= STOP_RUN {
                    converged = true;
                    break;
                }
            } else {
                small_run = 0;
            }
        }
        let f = kp - (m as f64 - 1.0);
        if f == 0.0 {
            converged = true;
            break;
        }
        ln_c += (f / m as f64).abs().ln();
        if f < 0.0 {
            sign_c = -sign_c;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            func: "mellin_g",
            terms: max_terms,
        });
    }
    if !(sum > 0.0) {
        return Err(Error::Precision {
            func: "mellin_g",
            detail: format!("series sum {sum} is not positive at s = {s}"),
        });
    }
    let ln_sum = reference + sum.ln();
    let cancellation = max_lt - ln_sum;
    let noise = 1e-15 * (m as f64).sqrt() * cancellation.exp();
    if noise > 0.1 * tol.rel_tol().max(1e-9) {
        return Err(Error::Precision {
            func: "mellin_g",
            detail: format!("terms cancel by a factor e^{cancellation:.1} at s = {s}"),
        });
    }
    let ln_value = x0 + (s - 1.0) * ln_two_a - ln_gamma(0.5 * k_g)? + ln_sum;
    if ln_value > f64::MAX.ln() {
        return Err(Error::Overflow { func: "mellin_g" });
    }
    Ok(SeriesEval {
        value: ln_value.exp(),
        terms: m,
        cancellation,
    })
}

const ORACLE_TOL: f64 = 1e-11;

/// E[(1 + α_g X)^{s−1}] by direct numerical integration.
pub fn mellin_g_oracle(s: f64, params: GammaApproxParams) -> Result<f64> {
    Ok(ln_mellin_g_quadrature(s, params)?.exp())
}

/// ln E[(1 + α_g X)^{s−1}] by quadrature over y with X = y².
fn ln_mellin_g_quadrature(s: f64, params: GammaApproxParams) -> Result<f64> {
    let GammaApproxParams { alpha_g, k_g } = params;
    // Density of y = √X is 2 y^{k−1} e^{−y²/2} / (2^{k/2} Γ(k/2)).
    let ln_norm = LN_2 - 0.5 * k_g * LN_2 - ln_gamma(0.5 * k_g)?;
    let log_f = |y: f64| (s - 1.0) * (alpha_g * y * y).ln_1p() + (k_g - 1.0) * y.ln() - 0.5 * y * y;
    let scale = k_g.max(1.0).sqrt();
    Ok(ln_integrate_semi_infinite(log_f, scale, ORACLE_TOL)? + ln_norm)
}

/// E[log₂(1 + γ)] under the scaled χ² law.
fn mean_log2_gamma_law(params: GammaApproxParams) -> Result<f64> {
    let GammaApproxParams { alpha_g, k_g } = params;
    let ln_norm = LN_2 - 0.5 * k_g * LN_2 - ln_gamma(0.5 * k_g)?;
    let log_f = |y: f64| {
        let r = (alpha_g * y * y).ln_1p() / LN_2;
        r.ln() + (k_g - 1.0) * y.ln() - 0.5 * y * y
    };
    Ok((ln_integrate_semi_infinite(log_f, k_g.max(1.0).sqrt(), ORACLE_TOL)? + ln_norm).exp())
}

/// Distribution of the per-frame SNR γ used by the service model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SnrLaw {
    /// Scaled χ² approximation.
    Gamma(GammaApproxParams),
    /// Constant SNR, as for a pure line-of-sight link.
    Deterministic { snr: f64 },
}

impl SnrLaw {
    /// Moment-matched law; zero variance gives the deterministic law.
    pub fn from_moments(moments: SnrMoments, matching: MomentMatching) -> Result<Self> {
        if moments.var <= 1e-14 * moments.mean * moments.mean {
            if !(moments.mean >= 0.0) {
                return Err(domain("SnrLaw", "negative mean SNR"));
            }
            return Ok(Self::Deterministic { snr: moments.mean });
        }
        Ok(Self::Gamma(gamma_approx_params_with(moments, matching)?))
    }

    /// E[(1 + γ)^{s−1}]; the series is used where it is accurate and
    /// quadrature elsewhere.
    pub fn mellin(&self, s: f64, tol: RealTolerance) -> Result<f64> {
        Ok(self.ln_mellin(s, tol)?.exp())
    }

    /// ln E[(1 + γ)^{s−1}].
    pub fn ln_mellin(&self, s: f64, tol: RealTolerance) -> Result<f64> {
        match *self {
            Self::Deterministic { snr } => Ok((s - 1.0) * snr.ln_1p()),
            Self::Gamma(p) => match mellin_g_series(s, p, tol) {
                Ok(v) => Ok(v.value.ln()),
                Err(Error::Precision { .. } | Error::NonConvergence { .. } | Error::Overflow { .. }) => {
                    ln_mellin_g_quadrature(s, p)
                }
                Err(e) => Err(e),
            },
        }
    }

    /// E[log₂(1 + γ)] in bits per symbol.
    pub fn mean_rate(&self) -> Result<f64> {
        match *self {
            Self::Deterministic { snr } => Ok(snr.ln_1p() / LN_2),
            Self::Gamma(p) => mean_log2_gamma_law(p),
        }
    }
}

/// Service process of the tagged device.
#[derive(Debug, Clone, PartialEq)]
pub enum ServiceModel {
    /// Fixed symbol budget, frames lost to false alarms.
    Baseline { p_fa: f64, n_k: u32, law: SnrLaw },
    /// Symbol budget drawn from a pmf.
    Sybil { p_fa: f64, nk: NkPmf, law: SnrLaw },
    /// Blocks of `k_rc` frames of `inner` service, lost entirely with
    /// probability `p_block`.
    Disassoc {
        p_block: f64,
        k_rc: u32,
        inner: Box<ServiceModel>,
    },
}

fn mellin_base_point(s: f64, p_fa: f64, n_k: u32, law: &SnrLaw, tol: RealTolerance) -> Result<f64> {
    if n_k == 0 {
        return Err(domain("mellin_service_baseline", "N_k must be ≥ 1"));
    }
    if p_fa >= 1.0 {
        return Ok(1.0);
    }
    Ok((1.0 - p_fa) * law.mellin(1.0 + n_k as f64 * (s - 1.0) / LN_2, tol)? + p_fa)
}

/// (1 − p_FA)·M_g(1 + N_k(s − 1)/ln 2) + p_FA.
pub fn mellin_service_baseline(s: f64, p_fa: f64, n_k: u32, law: &SnrLaw, tol: RealTolerance) -> Result<f64> {
    check_prob("mellin_service_baseline", p_fa)?;
    mellin_base_point(s, p_fa, n_k, law, tol)
}

/// (1 − p_FA)·Σₙ M_g(1 + n(s − 1)/ln 2)·p_N(n) + p_FA.
pub fn mellin_service_sybil(s: f64, p_fa: f64, nk: &NkPmf, law: &SnrLaw, tol: RealTolerance) -> Result<f64> {
    check_prob("mellin_service_sybil", p_fa)?;
    if p_fa >= 1.0 {
        return Ok(1.0);
    }
    let mut mix = 0.0;
    for &(n, p) in nk.support() {
        mix += p * law.mellin(1.0 + n as f64 * (s - 1.0) / LN_2, tol)?;
    }
    Ok((1.0 - p_fa) * mix + p_fa)
}

/// (1 − p_d)·M_base(s)^{K_RC} + p_d.
pub fn mellin_service_disassoc(s: f64, p_block: f64, k_rc: u32, baseline_mellin_at_s: f64) -> Result<f64> {
    let _ = s;
    check_prob("mellin_service_disassoc", p_block)?;
    if k_rc == 0 {
        return Err(domain("mellin_service_disassoc", "K_RC must be ≥ 1"));
    }
    Ok((1.0 - p_block) * baseline_mellin_at_s.powi(k_rc as i32) + p_block)
}

/// e^{α·timescale·(s − 1)}.
pub fn mellin_arrival_const(s: f64, alpha: f64, timescale: u32) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(domain("mellin_arrival_const", format!("α = {alpha} must be ≥ 0")));
    }
    Ok((alpha * timescale as f64 * (s - 1.0)).exp())
}

fn check_prob(func: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(func, format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

impl ServiceModel {
    /// Frames covered by one service step.
    pub fn timescale(&self) -> u32 {
        match self {
            Self::Disassoc { k_rc, .. } => *k_rc,
            _ => 1,
        }
    }

    pub fn mellin(&self, s: f64, tol: RealTolerance) -> Result<f64> {
        match self {
            Self::Baseline { p_fa, n_k, law } => mellin_service_baseline(s, *p_fa, *n_k, law, tol),
            Self::Sybil { p_fa, nk, law } => mellin_service_sybil(s, *p_fa, nk, law, tol),
            Self::Disassoc { p_block, k_rc, inner } => {
                mellin_service_disassoc(s, *p_block, *k_rc, inner.mellin(s, tol)?)
            }
        }
    }

    /// ln M_S(s), kept accurate when M_S(s) is tiny.
    pub fn ln_mellin(&self, s: f64, tol: RealTolerance) -> Result<f64> {
        let mix = |p_fa: f64, terms: &[(u32, f64)], law: &SnrLaw| -> Result<f64> {
            let mut logs = Vec::with_capacity(terms.len() + 1);
            if p_fa > 0.0 {
                logs.push(p_fa.ln());
            }
            if p_fa < 1.0 {
                for &(n, p) in terms {
                    if n == 0 {
                        return Err(domain("ServiceModel", "N_k must be ≥ 1"));
                    }
                    logs.push((1.0 - p_fa).ln() + p.ln() + law.ln_mellin(1.0 + n as f64 * (s - 1.0) / LN_2, tol)?);
                }
            }
            Ok(log_sum_exp(&logs))
        };
        match self {
            Self::Baseline { p_fa, n_k, law } => {
                check_prob("ServiceModel", *p_fa)?;
                mix(*p_fa, &[(*n_k, 1.0)], law)
            }
            Self::Sybil { p_fa, nk, law } => {
                check_prob("ServiceModel", *p_fa)?;
                mix(*p_fa, nk.support(), law)
            }
            Self::Disassoc { p_block, k_rc, inner } => {
                check_prob("ServiceModel", *p_block)?;
                let mut logs = Vec::with_capacity(2);
                if *p_block > 0.0 {
                    logs.push(p_block.ln());
                }
                if *p_block < 1.0 {
                    logs.push((1.0 - p_block).ln() + *k_rc as f64 * inner.ln_mellin(s, tol)?);
                }
                Ok(log_sum_exp(&logs))
            }
        }
    }

    /// Mean bits served per frame.
    pub fn mean_bits_per_frame(&self) -> Result<f64> {
        match self {
            Self::Baseline { p_fa, n_k, law } => Ok((1.0 - p_fa) * *n_k as f64 * law.mean_rate()?),
            Self::Sybil { p_fa, nk, law } => Ok((1.0 - p_fa) * nk.mean() * law.mean_rate()?),
            Self::Disassoc { p_block, inner, .. } => Ok((1.0 - p_block) * inner.mean_bits_per_frame()?),
        }
    }
}

fn log_sum_exp(logs: &[f64]) -> f64 {
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
}

/// α = u·E[s_k] for a target utilization u.
pub fn utilization_arrival_rate(u: f64, service: &ServiceModel) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(domain("utilization_arrival_rate", format!("u = {u} outside (0, 1)")));
    }
    let mean = service.mean_bits_per_frame()?;
    if !(mean > 0.0) {
        return Err(Error::DegenerateService("mean service is zero".into()));
    }
    Ok(u * mean)
}

/// Arrival and service pair for one kernel evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SncScenario {
    /// Bits per frame.
    pub alpha: f64,
    pub service: ServiceModel,
    pub tol: RealTolerance,
}

impl SncScenario {
    pub fn new(alpha: f64, service: ServiceModel) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(domain("SncScenario", format!("α = {alpha} must be finite and ≥ 0")));
        }
        Ok(Self {
            alpha,
            service,
            tol: RealTolerance::default(),
        })
    }

    pub fn timescale(&self) -> u32 {
        self.service.timescale()
    }

    pub fn arrival_mellin(&self, s: f64) -> f64 {
        (self.alpha * self.timescale() as f64 * (s - 1.0)).exp()
    }

    pub fn service_mellin(&self, s: f64) -> Result<f64> {
        self.service.mellin(s, self.tol)
    }

    /// (ln M_A(1 + s), ln M_S(1 − s)).
    fn ln_pair(&self, s: f64) -> Result<(f64, f64)> {
        Ok((
            self.alpha * self.timescale() as f64 * s,
            self.service.ln_mellin(1.0 - s, self.tol)?,
        ))
    }
}

/// M_S(1−s)^w / (1 − M_A(1+s)·M_S(1−s)), or +∞ when the product is ≥ 1.
pub fn steady_kernel(s: f64, w: u64, scenario: &SncScenario) -> Result<f64> {
    if !(s > 0.0) {
        return Err(domain("steady_kernel", format!("s = {s} must be > 0")));
    }
    let (la, ls) = scenario.ln_pair(s)?;
    Ok(log_kernel(la, ls, w).exp())
}

fn log_kernel(ln_ma: f64, ln_ms: f64, w: u64) -> f64 {
    let ln_rho = ln_ma + ln_ms;
    if ln_rho >= 0.0 {
        return f64::INFINITY;
    }
    w as f64 * ln_ms - (-(ln_rho.exp_m1())).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayBoundResult {
    /// Delay in kernel steps.
    pub w: u64,
    /// min(1, inf_s kernel).
    pub bound: f64,
    /// ln of the unclamped kernel minimum.
    pub ln_kernel: f64,
    pub s_star: f64,
    pub stable: bool,
}

impl DelayBoundResult {
    fn unstable(w: u64) -> Self {
        Self {
            w,
            bound: 1.0,
            ln_kernel: f64::INFINITY,
            s_star: f64::NAN,
            stable: false,
        }
    }
}

/// Smallest delay, in frames, that meets a violation target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DelayGuarantee {
    Frames(u64),
    Unbounded,
}

impl DelayGuarantee {
    pub fn frames(&self) -> Option<u64> {
        match self {
            Self::Frames(w) => Some(*w),
            Self::Unbounded => None,
        }
    }
}

impl std::fmt::Display for DelayGuarantee {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Frames(w) => write!(f, "{w}"),
            Self::Unbounded => f.write_str("unbounded"),
        }
    }
}

pub const S_GRID: usize = 400;
pub const S_MIN: f64 = 1e-6;
const S_CAP: f64 = 1e3;
const MAX_GUARANTEE_STEPS: u64 = 1 << 40;

/// Stable interval and grid of (ln M_A(1+s), ln M_S(1−s)) for one
/// scenario, shared across many delay values.
#[derive(Debug, Clone)]
pub struct KernelProfile<'a> {
    scenario: &'a SncScenario,
    s_max: f64,
    grid: Vec<(f64, f64, f64)>,
}

impl<'a> KernelProfile<'a> {
    pub fn new(scenario: &'a SncScenario) -> Result<Self> {
        let ln_rho = |s: f64| -> Result<f64> {
            let (a, b) = scenario.ln_pair(s)?;
            Ok(a + b)
        };
        if ln_rho(S_MIN)? >= 0.0 {
            return Ok(Self {
                scenario,
                s_max: 0.0,
                grid: Vec::new(),
            });
        }
        let mut lo = S_MIN;
        let mut hi = 2.0 * S_MIN;
        while ln_rho(hi)? < 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > S_CAP {
                hi = S_CAP;
                break;
            }
        }
        let s_max = if ln_rho(hi)? < 0.0 {
            hi
        } else {
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if ln_rho(mid)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-12 * hi {
                    break;
                }
            }
            lo
        };
        let span = (s_max / S_MIN).ln();
        let grid = par::try_map_indexed(S_GRID, |i| {
            let s = if i + 1 == S_GRID {
                s_max
            } else {
                S_MIN * (span * i as f64 / (S_GRID - 1) as f64).exp()
            };
            let (a, b) = scenario.ln_pair(s)?;
            Ok::<_, Error>((s, a, b))
        })?;
        Ok(Self { scenario, s_max, grid })
    }

    pub fn stable(&self) -> bool {
        !self.grid.is_empty()
    }

    /// Upper end of the stable interval (0 when unstable).
    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn delay_bound(&self, w: u64) -> Result<DelayBoundResult> {
        if !self.stable() {
            return Ok(DelayBoundResult::unstable(w));
        }
        let (mut best_i, mut best) = (0, f64::INFINITY);
        for (i, &(_, a, b)) in self.grid.iter().enumerate() {
            let v = log_kernel(a, b, w);
            if v < best {
                best = v;
                best_i = i;
            }
        }
        let mut s_star = self.grid[best_i].0;
        let lo = self.grid[best_i.saturating_sub(1)].0.ln();
        let hi = self.grid[(best_i + 1).min(self.grid.len() - 1)].0.ln();
        if hi > lo {
            let f = |t: f64| match self.scenario.ln_pair(t.exp()) {
                Ok((a, b)) => log_kernel(a, b, w),
                Err(_) => f64::INFINITY,
            };
            let (t, v) = golden_section_min(f, lo, hi, 1e-10);
            if v < best {
                best = v;
                s_star = t.exp();
            }
        }
        Ok(DelayBoundResult {
            w,
            bound: best.exp().min(1.0),
            ln_kernel: best,
            s_star,
            stable: true,
        })
    }

    /// Bound on P(W > w_frames) for a delay given in frames.
    pub fn delay_bound_frames(&self, w_frames: u64) -> Result<DelayBoundResult> {
        self.delay_bound(w_frames / self.scenario.timescale() as u64)
    }

    pub fn delay_guarantee(&self, epsilon: f64) -> Result<DelayGuarantee> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(domain("delay_guarantee", format!("ε = {epsilon} outside (0, 1]")));
        }
        if epsilon >= 1.0 {
            return Ok(DelayGuarantee::Frames(0));
        }
        if !self.stable() {
            return Ok(DelayGuarantee::Unbounded);
        }
        let meets = |w: u64| -> Result<bool> { Ok(self.delay_bound(w)?.bound <= epsilon) };
        if meets(0)? {
            return Ok(DelayGuarantee::Frames(0));
        }
        let mut hi = 1u64;
        while !meets(hi)? {
            hi *= 2;
            if hi > MAX_GUARANTEE_STEPS {
                return Ok(DelayGuarantee::Unbounded);
            }
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if meets(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(DelayGuarantee::Frames(hi * self.scenario.timescale() as u64))
    }
}

/// One-off bound at `w` kernel steps; build a [`KernelProfile`] to
/// evaluate many delays.
pub fn delay_bound(w: u64, scenario: &SncScenario) -> Result<DelayBoundResult> {
    KernelProfile::new(scenario)?.delay_bound(w)
}

pub fn delay_guarantee(epsilon: f64, scenario: &SncScenario) -> Result<DelayGuarantee> {
    KernelProfile::new(scenario)?.delay_guarantee(epsilon)
}
