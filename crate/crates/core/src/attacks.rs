//! Scheduling and service-availability models under the three attacks.

use std::collections::BTreeMap;

use crate::error::{domain, Error, Result};
use crate::specfun::poisson_binomial_pmf;

const SUM_TOL: f64 = 1e-12;

/// Probability mass function on {0, 1, …, len − 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf(Vec<f64>);

impl Pmf {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() || mass.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(domain("Pmf::new", "entries must be finite and nonnegative"));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(domain("Pmf::new", format!("entries sum to {total}")));
        }
        Ok(Self(mass))
    }

    pub fn point(k: usize) -> Self {
        let mut v = vec![0.0; k + 1];
        v[k] = 1.0;
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0.get(k).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn convolve(&self, other: &Pmf) -> Pmf {
        let mut out = vec![0.0; self.len() + other.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Pmf(out)
    }

    /// Same distribution moved up by `by`.
    pub fn shifted(&self, by: usize) -> Pmf {
        let mut v = vec![0.0; by];
        v.extend_from_slice(&self.0);
        Pmf(v)
    }
}

/// Distribution of the symbols N_k granted to a scheduled device.
#[derive(Debug, Clone, PartialEq)]
pub struct NkPmf {
    /// (symbols, probability), sorted by decreasing symbol count.
    support: Vec<(u32, f64)>,
}

impl NkPmf {
    pub fn point(n: u32) -> Self {
        Self {
            support: vec![(n, 1.0)],
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for (n, p) in pairs {
            if n == 0 || !(p >= 0.0) {
                return Err(domain("NkPmf", format!("invalid entry ({n}, {p})")));
            }
            *acc.entry(n).or_default() += p;
        }
        let support: Vec<(u32, f64)> = acc.into_iter().rev().filter(|(_, p)| *p > 0.0).collect();
        let total: f64 = support.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(domain("NkPmf", format!("entries sum to {total}")));
        }
        Ok(Self { support })
    }

    pub fn support(&self) -> &[(u32, f64)] {
        &self.support
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().map(|(n, p)| *n as f64 * p).sum()
    }

    pub fn prob(&self, n: u32) -> f64 {
        self.support.iter().find(|(m, _)| *m == n).map_or(0.0, |(_, p)| *p)
    }

    pub fn total(&self) -> f64 {
        self.support.iter().map(|(_, p)| p).sum()
    }
}

/// Frame layout and device sets for one uplink scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameResourceModel {
    pub n_frame: u32,
    pub active_set: Vec<String>,
    pub sybil_set: Vec<String>,
    pub arrival_rate: f64,
}

impl FrameResourceModel {
    pub fn validate(&self) -> Result<()> {
        if self.n_frame == 0 {
            return Err(Error::Config("n_frame must be ≥ 1".into()));
        }
        if self.active_set.is_empty() {
            return Err(Error::Config("active set is empty".into()));
        }
        if let Some(id) = self.sybil_set.iter().find(|id| self.active_set.contains(id)) {
            return Err(Error::Config(format!("sybil id {id} is also active")));
        }
        if !(self.arrival_rate >= 0.0) {
            return Err(Error::Config("arrival rate must be ≥ 0".into()));
        }
        Ok(())
    }

    /// Symbols each device gets when `scheduled` devices share the frame.
    pub fn symbols_for(&self, scheduled: usize) -> u32 {
        self.n_frame / scheduled.max(1) as u32
    }
}

/// Count and symbol-budget distributions seen by a tagged active device.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleDistribution {
    /// |I_DTP| over all active and Sybil identities.
    pub sched_pmf: Pmf,
    /// N_k given the tagged device is scheduled.
    pub nk_pmf: NkPmf,
}

impl ScheduleDistribution {
    /// Distributions for one tagged device among `n_active`, with
    /// `sybil` successes adding contenders.
    pub fn for_tagged(n_active: usize, p_fa: f64, sybil: &Pmf, n_frame: u32) -> Result<Self> {
        if n_active == 0 {
            return Err(domain("ScheduleDistribution", "need at least the tagged device"));
        }
        let sched_pmf = sched_dist_under_sybil(&baseline_sched_dist(n_active, p_fa)?, sybil);
        let others = sched_dist_under_sybil(&baseline_sched_dist(n_active - 1, p_fa)?, sybil);
        Ok(Self {
            sched_pmf,
            nk_pmf: nk_dist(&others, n_frame)?,
        })
    }
}

fn check_prob(func: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(func, format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Binomial(n_active, 1 − p_fa) number of scheduled devices.
pub fn baseline_sched_dist(n_active: usize, p_fa: f64) -> Result<Pmf> {
    check_prob("baseline_sched_dist", p_fa)?;
    Ok(Pmf(poisson_binomial_pmf(&vec![1.0 - p_fa; n_active])?))
}

/// Number of accepted Sybil identities, treating each test as independent.
pub fn sybil_success_dist(md_rates: &[f64]) -> Result<Pmf> {
    Ok(Pmf(poisson_binomial_pmf(md_rates)?))
}

pub fn sched_dist_under_sybil(baseline: &Pmf, sybil: &Pmf) -> Pmf {
    baseline.convolve(sybil)
}

/// Pushes the pmf of other scheduled devices through c ↦ ⌊N_Frame/(1 + c)⌋.
pub fn nk_dist(others: &Pmf, n_frame: u32) -> Result<NkPmf> {
    if n_frame == 0 {
        return Err(domain("nk_dist", "N_Frame must be ≥ 1"));
    }
    let total = others.total();
    if (total - 1.0).abs() > SUM_TOL * others.len() as f64 + 1e-12 {
        return Err(domain("nk_dist", format!("input pmf sums to {total}")));
    }
    let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
    for (c, p) in others.as_slice().iter().enumerate() {
        if *p == 0.0 {
            continue;
        }
        let n = n_frame / (c as u32 + 1);
        if n == 0 {
            return Err(domain("nk_dist", format!("{} contenders exceed N_Frame = {n_frame}", c + 1)));
        }
        *acc.entry(n).or_default() += p;
    }
    Ok(NkPmf {
        support: acc.into_iter().rev().map(|(n, p)| (n, p / total)).collect(),
    })
}

/// P(D = 1) = 1 − (1 − q·p_attack)^{K_RC}.
pub fn disassoc_block_prob(md_upper: f64, p_attack: f64, k_rc: u32) -> Result<f64> {
    check_prob("disassoc_block_prob", md_upper)?;
    check_prob("disassoc_block_prob", p_attack)?;
    if k_rc == 0 {
        return Err(domain("disassoc_block_prob", "K_RC must be ≥ 1"));
    }
    Ok(1.0 - (1.0 - md_upper * p_attack).powi(k_rc as i32))
}

/// Success probability of a forged disconnect when the access point cannot
/// tell two requests apart and picks one at random.
pub const COIN_FLIP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisassocModel {
    pub p_attack: f64,
    pub k_rc: u32,
    pub p_block: f64,
}

impl DisassocModel {
    /// `md_upper` is the per-frame probability that a forged disconnect is
    /// accepted.
    pub fn new(md_upper: f64, p_attack: f64, k_rc: u32) -> Result<Self> {
        Ok(Self {
            p_attack,
            k_rc,
            p_block: disassoc_block_prob(md_upper, p_attack, k_rc)?,
        })
    }
}
