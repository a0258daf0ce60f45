//! Deployment geometry and per-link Rice SIMO channel statistics.
//!
//! A link from a single-antenna device to the N_Rx-antenna access point is
//! h ~ CN(m, Σ) with a phased-array LOS mean m and fading covariance
//! Σ = P/(K+1)·A, [A]ⱼₖ = ρ^|j−k|. Noise power is normalized to one, so
//! the instantaneous SNR under maximum-ratio combining is ‖h‖².

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const MAX_ANTENNAS: usize = 64;

/// Uniform linear receive array at the access point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub n_rx: usize,
    /// Antenna spacing in wavelengths.
    pub delta_r: f64,
    /// Carrier frequency in Hz.
    pub carrier_freq: f64,
    /// Unit direction of the array axis in the plane.
    pub orientation: [f64; 2],
}

impl ArrayConfig {
    /// Half-wavelength array at 2.4 GHz whose axis is parallel to y = −x.
    pub fn standard(n_rx: usize) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            n_rx,
            delta_r: 0.5,
            carrier_freq: 2.4e9,
            orientation: [h, -h],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rx == 0 {
            return Err(Error::Config("array needs at least one antenna".into()));
        }
        if !(self.delta_r > 0.0) || !(self.carrier_freq > 0.0) {
            return Err(Error::Config("antenna spacing and carrier frequency must be positive".into()));
        }
        let norm = self.orientation[0].hypot(self.orientation[1]);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("array orientation has norm {norm}, expected 1")));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }
}

/// Exponent applied to distance in the received-power law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PathLossExponent {
    /// P = P₀ d^(−β/2)
    #[default]
    HalfBeta,
    /// P = P₀ d^(−β)
    Beta,
}

/// Received power per antenna, normalized to a unit noise spectral density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLossModel {
    pub p0: f64,
    pub beta: f64,
    #[serde(default)]
    pub exponent: PathLossExponent,
}

impl PathLossModel {
    /// Chooses P₀ so that a device at `distance` sees `snr_db` per antenna.
    pub fn calibrated(beta: f64, exponent: PathLossExponent, distance: f64, snr_db: f64) -> Self {
        let mut model = Self {
            p0: 1.0,
            beta,
            exponent,
        };
        model.p0 = db_to_linear(snr_db) / model.received_power(distance);
        model
    }

    pub fn received_power(&self, distance: f64) -> f64 {
        let e = match self.exponent {
            PathLossExponent::HalfBeta => self.beta / 2.0,
            PathLossExponent::Beta => self.beta,
        };
        self.p0 * distance.powf(-e)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p0 > 0.0) || !(self.beta > 0.0) {
            return Err(Error::Config("path loss needs p0 > 0 and beta > 0".into()));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Everything needed to turn a position into link statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGeometry {
    pub array: ArrayConfig,
    pub pathloss: PathLossModel,
    /// Antenna correlation coefficient ρ.
    pub corr: f64,
}

/// Distribution of one device's channel at the access point.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceChannelStats {
    pub mean: CVector,
    pub covariance: CMatrix,
    /// Mean received power per antenna P.
    pub power: f64,
    /// Linear Rice factor.
    pub rice_k: f64,
    pub distance: f64,
    /// Angle between the device direction and the array axis, in [0, π].
    pub aoa: f64,
    pub dir_cosine: f64,
    pub corr: f64,
}

impl DeviceChannelStats {
    pub fn n_rx(&self) -> usize {
        self.mean.len()
    }
}

/// [A]ⱼₖ = ρ^|j−k|
pub fn correlation_matrix(n: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |j, k| rho.powi((j as i32 - k as i32).abs()))
}

/// Unit spatial signature (1/√N)[z⁰, z^Ω, …, z^((N−1)Ω)], z = e^(−j2πΔ_r).
pub fn spatial_signature(omega: f64, array: &ArrayConfig) -> Result<CVector> {
    if !(omega.abs() <= 1.0) {
        return Err(domain("spatial_signature", format!("directional cosine {omega} outside [-1, 1]")));
    }
    let n = array.n_rx;
    let scale = 1.0 / (n as f64).sqrt();
    Ok(CVector::from_fn(n, |k, _| {
        Complex64::from_polar(scale, -2.0 * std::f64::consts::PI * array.delta_r * k as f64 * omega)
    }))
}

/// Angle between `position` (seen from the access point at the origin) and
/// the array axis.
pub fn angle_of_arrival(position: [f64; 2], array: &ArrayConfig) -> Result<f64> {
    let d = position[0].hypot(position[1]);
    if d < 1e-12 {
        return Err(Error::DegenerateGeometry(
            "position coincides with the access point".into(),
        ));
    }
    let cos = (position[0] * array.orientation[0] + position[1] * array.orientation[1]) / d;
    Ok(cos.clamp(-1.0, 1.0).acos())
}

/// Point at `distance` whose direction makes angle `aoa` with the array
/// axis, rotating counter-clockwise from the axis.
pub fn position_from_polar(distance: f64, aoa: f64, array: &ArrayConfig) -> [f64; 2] {
    let [ux, uy] = array.orientation;
    let (s, c) = aoa.sin_cos();
    [distance * (c * ux - s * uy), distance * (s * ux + c * uy)]
}

/// Channel statistics of a device at `position` with linear Rice factor
/// `rice_k` (may be +∞ for a pure LOS link).
pub fn device_stats(position: [f64; 2], rice_k: f64, geom: &LinkGeometry) -> Result<DeviceChannelStats> {
    geom.array.validate()?;
    geom.pathloss.validate()?;
    if !(rice_k >= 0.0) {
        return Err(domain("device_stats", format!("Rice factor {rice_k} must be nonnegative")));
    }
    if !(geom.corr.abs() < 1.0) {
        return Err(domain("device_stats", format!("correlation {} outside (-1, 1)", geom.corr)));
    }
    let aoa = angle_of_arrival(position, &geom.array)?;
    let distance = position[0].hypot(position[1]);
    let dir_cosine = aoa.cos().clamp(-1.0, 1.0);
    let n = geom.array.n_rx;
    let power = geom.pathloss.received_power(distance);

    let (los_frac, scatter_frac) = if rice_k.is_infinite() {
        (1.0, 0.0)
    } else {
        (rice_k / (rice_k + 1.0), 1.0 / (rice_k + 1.0))
    };
    let amplitude = (power * n as f64 * los_frac).sqrt();
    let phase = -2.0 * std::f64::consts::PI * distance / geom.array.wavelength();
    let mean = spatial_signature(dir_cosine, &geom.array)? * Complex64::from_polar(amplitude, phase);
    let covariance = correlation_matrix(n, geom.corr).map(|a| Complex64::new(a * power * scatter_frac, 0.0));

    Ok(DeviceChannelStats {
        mean,
        covariance,
        power,
        rice_k,
        distance,
        aoa,
        dir_cosine,
        corr: geom.corr,
    })
}

/// Precomputed CN(m, Σ) sampler: h = m + L z with L Lᴴ = Σ.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    n: usize,
    mean: Vec<Complex64>,
    /// Row-major n×n square-root factor.
    factor: Vec<Complex64>,
}

impl ChannelSampler {
    pub fn new(stats: &DeviceChannelStats) -> Result<Self> {
        let n = stats.n_rx();
        let factor = hermitian_sqrt(&stats.covariance)?;
        Ok(Self {
            n,
            mean: stats.mean.iter().copied().collect(),
            factor: (0..n * n).map(|i| factor[(i / n, i % n)]).collect(),
        })
    }

    pub fn n_rx(&self) -> usize {
        self.n
    }

    /// Writes one channel draw into `out` (length N_Rx).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Complex64]) {
        let n = self.n;
        let mut buf = [Complex64::new(0.0, 0.0); MAX_ANTENNAS];
        let z = &mut buf[..n];
        for zi in z.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *zi = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        }
        for (j, o) in out.iter_mut().enumerate().take(n) {
            let row = &self.factor[j * n..(j + 1) * n];
            let mut acc = self.mean[j];
            for (l, zk) in row.iter().zip(z.iter()) {
                acc += l * zk;
            }
            *o = acc;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        self.sample_into(rng, &mut out);
        CVector::from_vec(out)
    }
}

/// L with L Lᴴ = Σ via the Hermitian eigendecomposition; eigenvalues down to
/// −1e-12·λ_max are treated as rounding noise and clamped to zero.
pub fn hermitian_sqrt(cov: &CMatrix) -> Result<CMatrix> {
    let n = cov.nrows();
    if cov.ncols() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            got: cov.ncols(),
        });
    }
    if n > MAX_ANTENNAS {
        return Err(Error::Factorization(format!("{n} antennas exceeds the supported {MAX_ANTENNAS}")));
    }
    let eig = SymmetricEigen::new(cov.clone());
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let tol = 1e-12 * lmax.max(f64::MIN_POSITIVE);
    let mut factor = eig.eigenvectors.clone();
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -tol {
            return Err(Error::Factorization(format!("negative eigenvalue {lam}")));
        }
        let root = lam.max(0.0).sqrt();
        factor.column_mut(k).scale_mut(root);
    }
    Ok(factor)
}

/// One channel draw from CN(mean, covariance).
pub fn sample_channel<R: Rng + ?Sized>(stats: &DeviceChannelStats, rng: &mut R) -> Result<CVector> {
    Ok(ChannelSampler::new(stats)?.sample(rng))
}

/// First two moments of the instantaneous SNR γ = ‖h‖².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrMoments {
    pub mean: f64,
    pub var: f64,
}

/// (Tr Σ + mᴴm, Tr Σ² + mᴴΣm).
///
/// The variance omits the factor 2 on the mean-dependent term that the
/// exact complex-Gaussian quadratic form carries; see [`snr_variance_exact`].
pub fn snr_moments(stats: &DeviceChannelStats) -> SnrMoments {
    let (tr, tr2, msm, mm) = snr_terms(stats);
    SnrMoments {
        mean: tr + mm,
        var: tr2 + msm,
    }
}

/// Exact Var‖h‖² = Tr Σ² + 2 mᴴΣm for h ~ CN(m, Σ).
pub fn snr_variance_exact(stats: &DeviceChannelStats) -> f64 {
    let (_, tr2, msm, _) = snr_terms(stats);
    tr2 + 2.0 * msm
}

fn snr_terms(stats: &DeviceChannelStats) -> (f64, f64, f64, f64) {
    let s = &stats.covariance;
    let m = &stats.mean;
    let tr = s.trace().re;
    let tr2 = (s * s).trace().re;
    let msm = (m.adjoint() * s * m)[(0, 0)].re;
    let mm = m.norm_squared();
    (tr, tr2, msm, mm)
}

/// A device in a deployment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub id: String,
    pub position: [f64; 2],
}

/// External attacker placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackerSpec {
    pub position: [f64; 2],
    pub rice_k_db: f64,
}

/// Rectangular grid layout with the access point at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub origin: [f64; 2],
}

impl Default for GridSpec {
    /// 5×5 points over a 20 m × 20 m square; the corner at the access point
    /// is skipped, leaving 24 devices.
    fn default() -> Self {
        Self {
            nx: 5,
            ny: 5,
            spacing: 5.0,
            origin: [0.0, 0.0],
        }
    }
}

/// Device layout plus the radio parameters shared by every link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub array: ArrayConfig,
    pub pathloss: PathLossModel,
    /// Rice factor of the legitimate links, in dB (−inf for Rayleigh).
    pub rice_k_db: f64,
    /// Antenna correlation ρ.
    pub corr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attacker: Option<AttackerSpec>,
    pub devices: Vec<Device>,
}

/// Path-loss exponent used by [`Deployment::grid`].
pub const DEFAULT_BETA: f64 = 3.0;
/// Per-antenna mean SNR of the farthest grid device used to calibrate P₀.
pub const DEFAULT_EDGE_SNR_DB: f64 = 15.0;

impl Deployment {
    /// Grid deployment with ids D1, D2, … assigned along x-major order
    /// (all points of the first column, bottom to top, then the next
    /// column). Grid points at the access point are skipped.
    pub fn grid(spec: GridSpec, n_rx: usize, rice_k_db: f64, corr: f64) -> Result<Self> {
        if spec.nx == 0 || spec.ny == 0 {
            return Err(Error::Config("grid needs at least one row and column".into()));
        }
        let mut devices = Vec::with_capacity(spec.nx * spec.ny);
        for ix in 0..spec.nx {
            for iy in 0..spec.ny {
                let p = [
                    spec.origin[0] + ix as f64 * spec.spacing,
                    spec.origin[1] + iy as f64 * spec.spacing,
                ];
                if p[0].hypot(p[1]) < 1e-9 {
                    continue;
                }
                devices.push(Device {
                    id: format!("D{}", devices.len() + 1),
                    position: p,
                });
            }
        }
        let farthest = devices
            .iter()
            .map(|d| d.position[0].hypot(d.position[1]))
            .fold(0.0, f64::max);
        if devices.is_empty() {
            return Err(Error::Config("grid contains only the access point".into()));
        }
        let dep = Self {
            array: ArrayConfig::standard(n_rx),
            pathloss: PathLossModel::calibrated(
                DEFAULT_BETA,
                PathLossExponent::HalfBeta,
                farthest,
                DEFAULT_EDGE_SNR_DB,
            ),
            rice_k_db,
            corr,
            attacker: None,
            devices,
        };
        dep.validate()?;
        Ok(dep)
    }

    pub fn validate(&self) -> Result<()> {
        self.array.validate()?;
        self.pathloss.validate()?;
        if !(self.corr.abs() < 1.0) {
            return Err(Error::Config(format!("correlation {} outside (-1, 1)", self.corr)));
        }
        let mut seen = std::collections::HashSet::new();
        for d in &self.devices {
            if !seen.insert(d.id.as_str()) {
                return Err(Error::Config(format!("duplicate device id {}", d.id)));
            }
            if d.position[0].hypot(d.position[1]) < 1e-9 {
                return Err(Error::Config(format!("device {} sits on the access point", d.id)));
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> LinkGeometry {
        LinkGeometry {
            array: self.array.clone(),
            pathloss: self.pathloss.clone(),
            corr: self.corr,
        }
    }

    pub fn rice_k(&self) -> f64 {
        db_to_linear(self.rice_k_db)
    }

    pub fn device(&self, id: &str) -> Result<&Device> {
        self.devices
            .iter()
            .find(|d| d.id == id)
            .ok_or_else(|| Error::Config(format!("unknown device id {id}")))
    }

    pub fn device_stats(&self, id: &str) -> Result<DeviceChannelStats> {
        device_stats(self.device(id)?.position, self.rice_k(), &self.geometry())
    }

    pub fn with_n_rx(mut self, n_rx: usize) -> Self {
        self.array.n_rx = n_rx;
        self
    }
}
