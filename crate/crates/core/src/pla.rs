//! Authentication decisions on the SIMO channel feature: discriminant,
//! false-alarm and missed-detection rates, and bounds for the two-message
//! case.

use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::channel::{CMatrix, CVector, DeviceChannelStats};
use crate::error::{domain, Error, Result};
use crate::specfun::{chi2_sf, noncentral_chi2_cdf};

/// Threshold test d(h) ≤ T shared by every device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaDecisionModel {
    threshold: f64,
    n_rx: usize,
    p_fa: f64,
}

impl PlaDecisionModel {
    pub fn from_threshold(threshold: f64, n_rx: usize) -> Result<Self> {
        Ok(Self {
            threshold,
            n_rx,
            p_fa: false_alarm_rate(threshold, n_rx)?,
        })
    }

    pub fn from_false_alarm(target_fa: f64, n_rx: usize) -> Result<Self> {
        Self::from_threshold(threshold_for_fa(target_fa, n_rx)?, n_rx)
    }

    /// No authentication: every request passes.
    pub fn disabled(n_rx: usize) -> Self {
        Self {
            threshold: f64::INFINITY,
            n_rx,
            p_fa: 0.0,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn p_fa(&self) -> f64 {
        self.p_fa
    }

    pub fn is_enabled(&self) -> bool {
        self.threshold.is_finite()
    }

    pub fn accepts(&self, discriminant: f64) -> bool {
        discriminant <= self.threshold
    }
}

/// Distribution parameters of a legitimate device's discriminant evaluated
/// on the attacker's channel: d ~ λ·χ²_{2N}(ν).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpersonationParams {
    pub lambda: f64,
    pub nu: f64,
    pub n_rx: usize,
}

impl ImpersonationParams {
    pub fn new(lambda: f64, nu: f64, n_rx: usize) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() || !(nu >= 0.0) || !nu.is_finite() || n_rx == 0 {
            return Err(domain(
                "ImpersonationParams",
                format!("need λ > 0, ν ≥ 0, N_Rx ≥ 1 (got {lambda}, {nu}, {n_rx})"),
            ));
        }
        Ok(Self { lambda, nu, n_rx })
    }
}

/// Precomputed Mahalanobis-type discriminant d(h) = 2 (h − m)ᴴ Σ⁻¹ (h − m).
#[derive(Debug, Clone)]
pub struct Discriminant {
    n: usize,
    mean: Vec<Complex64>,
    /// Row-major Σ⁻¹.
    inv: Vec<Complex64>,
}

impl Discriminant {
    pub fn new(feature_mean: &CVector, feature_cov: &CMatrix) -> Result<Self> {
        let n = feature_mean.len();
        if feature_cov.nrows() != n || feature_cov.ncols() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                got: feature_cov.nrows(),
            });
        }
        let chol = Cholesky::new(feature_cov.clone()).ok_or(Error::SingularCovariance)?;
        let inv = chol.inverse();
        if inv.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::SingularCovariance);
        }
        Ok(Self {
            n,
            mean: feature_mean.iter().copied().collect(),
            inv: (0..n * n).map(|i| inv[(i / n, i % n)]).collect(),
        })
    }

    pub fn for_device(stats: &DeviceChannelStats) -> Result<Self> {
        Self::new(&stats.mean, &stats.covariance)
    }

    pub fn eval(&self, observed: &[Complex64]) -> f64 {
        let n = self.n;
        let mut diff = [Complex64::new(0.0, 0.0); crate::channel::MAX_ANTENNAS];
        for ((d, h), m) in diff.iter_mut().zip(observed).zip(&self.mean) {
            *d = h - m;
        }
        let mut q = 0.0;
        for j in 0..n {
            let row = &self.inv[j * n..(j + 1) * n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, dk) in row.iter().zip(&diff[..n]) {
                acc += s * dk;
            }
            q += (diff[j].conj() * acc).re;
        }
        (2.0 * q).max(0.0)
    }
}

/// d(h) for a single observation.
pub fn discriminant(feature_mean: &CVector, feature_cov: &CMatrix, observed: &CVector) -> Result<f64> {
    if observed.len() != feature_mean.len() {
        return Err(Error::ShapeMismatch {
            expected: feature_mean.len(),
            got: observed.len(),
        });
    }
    Ok(Discriminant::new(feature_mean, feature_cov)?.eval(observed.as_slice()))
}

/// p_FA(T) = 1 − F_{χ²_{2N}}(T).
pub fn false_alarm_rate(threshold: f64, n_rx: usize) -> Result<f64> {
    if !(threshold >= 0.0) {
        return Err(domain("false_alarm_rate", format!("threshold {threshold} must be ≥ 0")));
    }
    if n_rx == 0 {
        return Err(domain("false_alarm_rate", "N_Rx must be ≥ 1"));
    }
    if threshold.is_infinite() {
        return Ok(0.0);
    }
    chi2_sf(2 * n_rx as u32, threshold)
}

/// Threshold T with p_FA(T) = `target_fa`, by bracketed bisection on the
/// log of the χ² tail.
pub fn threshold_for_fa(target_fa: f64, n_rx: usize) -> Result<f64> {
    if !(target_fa > 0.0 && target_fa < 1.0) {
        return Err(domain("threshold_for_fa", format!("target {target_fa} outside (0, 1)")));
    }
    let ln_target = target_fa.ln();
    let f = |t: f64| -> Result<f64> { Ok(false_alarm_rate(t, n_rx)?.ln() - ln_target) };
    let mut lo = 0.0;
    let mut hi = 2.0 * n_rx as f64 + 1.0;
    while f(hi)? > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e8 {
            return Err(domain("threshold_for_fa", format!("target {target_fa} too small")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// (λ, ν) for an attacker impersonating `legit`.
///
/// Both covariances must be scalar multiples of the same correlation
/// matrix; anything else is rejected.
pub fn impersonation_params(legit: &DeviceChannelStats, attacker: &DeviceChannelStats) -> Result<ImpersonationParams> {
    let n = legit.n_rx();
    if attacker.n_rx() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            got: attacker.n_rx(),
        });
    }
    let c_legit = legit.covariance.trace().re / n as f64;
    let c_att = attacker.covariance.trace().re / n as f64;
    if !(c_legit > 0.0) || !(c_att > 0.0) {
        return Err(Error::NonConformingCovariance);
    }
    let a_legit = &legit.covariance / Complex64::new(c_legit, 0.0);
    let a_att = &attacker.covariance / Complex64::new(c_att, 0.0);
    if (&a_att - &a_legit).norm() > 1e-9 * a_legit.norm() {
        return Err(Error::NonConformingCovariance);
    }
    let lambda = c_att / c_legit;
    let nu = Discriminant::new(&attacker.mean, &attacker.covariance)?.eval(legit.mean.as_slice());
    ImpersonationParams::new(lambda, nu, n)
}

/// p_MD(T) = F_{χ²_{2N}(ν)}(T/λ).
pub fn missed_detection_rate(threshold: f64, params: &ImpersonationParams) -> Result<f64> {
    if !(threshold >= 0.0) {
        return Err(domain("missed_detection_rate", format!("threshold {threshold} must be ≥ 0")));
    }
    noncentral_chi2_cdf(2 * params.n_rx as u32, params.nu, threshold / params.lambda)
}

/// ln of the Chernoff objective E[e^{t d_i}] E[e^{−t d_E}].
fn chernoff_log_objective(t: f64, p: &ImpersonationParams) -> f64 {
    let base = (1.0 - 2.0 * t) * (1.0 + 2.0 * p.lambda * t);
    if base <= 0.0 {
        return f64::INFINITY;
    }
    -(p.n_rx as f64) * base.ln() - p.nu * p.lambda * t / (1.0 + 2.0 * p.lambda * t)
}

const CHERNOFF_GRID: usize = 200;

/// Upper bound on P(d_i(h_E) < d_i(h_i)) by minimizing the Chernoff
/// objective over t ∈ [0, 1/2).
///
/// The base (1 + 2(λ−1)t − 4λt²) factors as (1 − 2t)(1 + 2λt). Only t ≥ 0
/// yields a valid bound on this event, so negative t is never searched.
pub fn chernoff_pd(params: &ImpersonationParams) -> f64 {
    chernoff_minimizer(params).1
}

/// (t*, bound) of the Chernoff minimization.
pub fn chernoff_minimizer(params: &ImpersonationParams) -> (f64, f64) {
    let g = |t: f64| chernoff_log_objective(t, params);
    let step = 0.5 / CHERNOFF_GRID as f64;
    let (mut best_i, mut best) = (0usize, 0.0f64);
    for i in 1..CHERNOFF_GRID {
        let v = g(i as f64 * step);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let lo = best_i.saturating_sub(1) as f64 * step;
    let hi = ((best_i + 1) as f64 * step).min(0.5 - 1e-15);
    let (t, v) = golden_section_min(g, lo, hi, 1e-13);
    let (t, v) = if v < best { (t, v) } else { (best_i as f64 * step, best) };
    (t, v.exp().clamp(0.0, 1.0))
}

pub(crate) fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Sandwich for the two-message missed-detection probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdL2Bounds {
    pub lower: f64,
    pub upper: f64,
    pub p_fa: f64,
    pub p_md: f64,
    pub chernoff: f64,
}

/// p_FA·p_MD ≤ p_MD^{L=2} ≤ min(p_MD, p_d).
pub fn md_l2_bounds(threshold: f64, params: &ImpersonationParams) -> Result<MdL2Bounds> {
    let p_fa = false_alarm_rate(threshold, params.n_rx)?;
    let p_md = missed_detection_rate(threshold, params)?;
    let chernoff = chernoff_pd(params);
    let lower = p_fa * p_md;
    Ok(MdL2Bounds {
        lower,
        upper: p_md.min(chernoff).max(lower),
        p_fa,
        p_md,
        chernoff,
    })
}
