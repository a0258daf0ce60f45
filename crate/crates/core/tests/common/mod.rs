// Shared fixtures for the integration tests. Not every test binary uses
// every helper.
#![allow(dead_code)]

use num_complex::Complex64;
use pla_delay::channel::{correlation_matrix, CMatrix, CVector, Deployment, DeviceChannelStats, GridSpec};
use pla_delay::pla::{impersonation_params, Discriminant};

/// Reference 24-device grid.
pub fn reference_deployment(n_rx: usize, rice_k_db: f64, corr: f64) -> Deployment {
    Deployment::grid(GridSpec::default(), n_rx, rice_k_db, corr).unwrap()
}

fn stats(mean: CVector, covariance: CMatrix, rice_k: f64, corr: f64) -> DeviceChannelStats {
    let n = mean.len();
    let power = (covariance.trace().re + mean.norm_squared()) / n as f64;
    DeviceChannelStats {
        mean,
        covariance,
        power,
        rice_k,
        distance: 1.0,
        aoa: 0.0,
        dir_cosine: 1.0,
        corr,
    }
}

/// Legitimate and attacker statistics whose impersonation parameters are
/// exactly (`lambda`, `nu`).
pub fn synthetic_pair(lambda: f64, nu: f64, n_rx: usize, corr: f64) -> (DeviceChannelStats, DeviceChannelStats) {
    let a = correlation_matrix(n_rx, corr).map(|x| Complex64::new(x, 0.0));
    let mean = CVector::from_fn(n_rx, |k, _| Complex64::from_polar(1.5, 0.7 * k as f64));
    let legit = stats(mean.clone(), a.clone(), 2.0, corr);
    let eve_cov = a.scale(lambda);
    let dir = CVector::from_fn(n_rx, |k, _| Complex64::new(1.0, 0.3 * k as f64));
    let unit_nu = Discriminant::new(&CVector::zeros(n_rx), &eve_cov).unwrap().eval(dir.as_slice());
    let offset = dir.scale((nu / unit_nu).sqrt());
    let eve = stats(&mean - &offset, eve_cov, 1.0, corr);
    let p = impersonation_params(&legit, &eve).unwrap();
    assert!((p.lambda - lambda).abs() <= 1e-12 * lambda);
    assert!((p.nu - nu).abs() <= 1e-9 * nu.max(1.0));
    (legit, eve)
}

/// Three binomial standard errors for probability `p` over `n` draws.
pub fn three_sigma(p: f64, n: u64) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}
