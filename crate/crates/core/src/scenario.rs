//! One tagged link in a deployment, with its authentication setting and
//! attack, turned into the analytical and simulated models.

use serde::{Deserialize, Serialize};

use crate::attacks::{
    baseline_sched_dist, disassoc_block_prob, nk_dist, sybil_success_dist, NkPmf, Pmf, COIN_FLIP,
};
use crate::channel::{db_to_linear, device_stats, position_from_polar, Deployment, DeviceChannelStats, SnrMoments};
use crate::channel::{snr_moments, snr_variance_exact};
use crate::error::{Error, Result};
use crate::pla::{impersonation_params, md_l2_bounds, missed_detection_rate, PlaDecisionModel};
use crate::sim::{SimConfig, SimScenario};
use crate::snc::{utilization_arrival_rate, MomentMatching, ServiceModel, SncScenario, SnrLaw};
use crate::specfun::RealTolerance;

/// Symbols per frame used when nothing else is configured.
pub const DEFAULT_N_FRAME: u32 = 288;

/// Active devices of the reference deployment: the quadrant farthest from
/// the access point.
pub const DEFAULT_ACTIVE: [&str; 9] = ["D12", "D13", "D14", "D17", "D18", "D19", "D22", "D23", "D24"];

/// Authentication setting at the access point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PlaSetting {
    Disabled,
    FalseAlarm { p_fa: f64 },
    Threshold { threshold: f64 },
}

impl PlaSetting {
    pub fn model(&self, n_rx: usize) -> Result<PlaDecisionModel> {
        match *self {
            Self::Disabled => Ok(PlaDecisionModel::disabled(n_rx)),
            Self::FalseAlarm { p_fa } => PlaDecisionModel::from_false_alarm(p_fa, n_rx),
            Self::Threshold { threshold } => PlaDecisionModel::from_threshold(threshold, n_rx),
        }
    }
}

/// Where the attacker transmits from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "kebab-case")]
pub enum EvePlacement {
    /// A compromised device; the attacker's channel is that device's own.
    Device { id: String },
    Position { position: [f64; 2], rice_k_db: f64 },
    /// Distance and angle to the array axis.
    Polar { distance: f64, aoa: f64, rice_k_db: f64 },
}

impl EvePlacement {
    pub fn stats(&self, deployment: &Deployment) -> Result<DeviceChannelStats> {
        let geom = deployment.geometry();
        match self {
            Self::Device { id } => deployment.device_stats(id),
            Self::Position { position, rice_k_db } => device_stats(*position, db_to_linear(*rice_k_db), &geom),
            Self::Polar {
                distance,
                aoa,
                rice_k_db,
            } => device_stats(
                position_from_polar(*distance, *aoa, &deployment.array),
                db_to_linear(*rice_k_db),
                &geom,
            ),
        }
    }

    pub fn device_id(&self) -> Option<&str> {
        match self {
            Self::Device { id } => Some(id),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Attack {
    None,
    Sybil { eve: EvePlacement, targets: Vec<String> },
    Disassociation { eve: EvePlacement, p_attack: f64, k_rc: u32 },
}

/// How the symbol budget of the tagged device is modelled in the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NkModel {
    /// Every other active device is assumed scheduled.
    #[default]
    AllScheduled,
    /// Other devices are scheduled independently with probability 1 − p_FA.
    Binomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceModel {
    /// Tr Σ² + mᴴΣm.
    #[default]
    Printed,
    /// Tr Σ² + 2 mᴴΣm.
    Exact,
}

/// Analysis options that do not change the modelled system.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalysisOptions {
    pub matching: MomentMatching,
    pub variance: VarianceModel,
    pub nk: NkModel,
    pub tol: RealTolerance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub deployment: Deployment,
    pub tagged: String,
    /// Active devices, including the tagged one.
    pub active: Vec<String>,
    pub n_frame: u32,
    pub pla: PlaSetting,
    pub attack: Attack,
    pub options: AnalysisOptions,
}

impl Experiment {
    /// Baseline experiment for `tagged` with the default active set.
    pub fn new(deployment: Deployment, tagged: &str, pla: PlaSetting) -> Self {
        Self {
            deployment,
            tagged: tagged.to_string(),
            active: DEFAULT_ACTIVE.iter().map(|s| s.to_string()).collect(),
            n_frame: DEFAULT_N_FRAME,
            pla,
            attack: Attack::None,
            options: AnalysisOptions::default(),
        }
    }

    pub fn with_attack(mut self, attack: Attack) -> Self {
        self.attack = attack;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.deployment.validate()?;
        self.deployment.device(&self.tagged)?;
        if !self.active.contains(&self.tagged) {
            return Err(Error::Config(format!("tagged device {} is not active", self.tagged)));
        }
        for id in &self.active {
            self.deployment.device(id)?;
        }
        if self.n_frame < self.active.len() as u32 {
            return Err(Error::Config(format!(
                "{} active devices exceed {} symbols",
                self.active.len(),
                self.n_frame
            )));
        }
        match &self.attack {
            Attack::None => {}
            Attack::Sybil { eve, targets } => {
                if let Some(id) = eve.device_id() {
                    self.deployment.device(id)?;
                }
                for t in targets {
                    self.deployment.device(t)?;
                    if self.active.contains(t) {
                        return Err(Error::Config(format!("sybil target {t} is also active")));
                    }
                }
                if self.active.len() + targets.len() > self.n_frame as usize {
                    return Err(Error::Config("sybil identities exceed the symbols per frame".into()));
                }
            }
            Attack::Disassociation { eve, p_attack, k_rc } => {
                if let Some(id) = eve.device_id() {
                    self.deployment.device(id)?;
                }
                if !(0.0..=1.0).contains(p_attack) {
                    return Err(Error::Config(format!("p_attack {p_attack} outside [0, 1]")));
                }
                if *k_rc == 0 {
                    return Err(Error::Config("k_rc must be ≥ 1".into()));
                }
            }
        }
        self.pla.model(self.n_rx())?;
        Ok(())
    }

    pub fn n_rx(&self) -> usize {
        self.deployment.array.n_rx
    }

    pub fn pla_model(&self) -> Result<PlaDecisionModel> {
        self.pla.model(self.n_rx())
    }

    pub fn tagged_stats(&self) -> Result<DeviceChannelStats> {
        self.deployment.device_stats(&self.tagged)
    }

    pub fn snr_moments(&self) -> Result<SnrMoments> {
        let stats = self.tagged_stats()?;
        let mut m = snr_moments(&stats);
        if self.options.variance == VarianceModel::Exact {
            m.var = snr_variance_exact(&stats);
        }
        Ok(m)
    }

    pub fn snr_law(&self) -> Result<SnrLaw> {
        SnrLaw::from_moments(self.snr_moments()?, self.options.matching)
    }

    /// Inactive devices an internal attacker at `eve` can claim, in id
    /// order.
    pub fn sybil_candidates(&self, eve: &EvePlacement) -> Vec<String> {
        let mut ids: Vec<&crate::channel::Device> = self
            .deployment
            .devices
            .iter()
            .filter(|d| !self.active.contains(&d.id) && Some(d.id.as_str()) != eve.device_id())
            .collect();
        ids.sort_by_key(|d| id_order(&d.id));
        ids.into_iter().map(|d| d.id.clone()).collect()
    }

    /// Probability that the attacker's channel passes the test of each
    /// Sybil target.
    pub fn sybil_md_rates(&self) -> Result<Vec<f64>> {
        let Attack::Sybil { eve, targets } = &self.attack else {
            return Ok(Vec::new());
        };
        let pla = self.pla_model()?;
        if !pla.is_enabled() {
            return Ok(vec![1.0; targets.len()]);
        }
        let e = eve.stats(&self.deployment)?;
        targets
            .iter()
            .map(|t| {
                let params = impersonation_params(&self.deployment.device_stats(t)?, &e)?;
                missed_detection_rate(pla.threshold(), &params)
            })
            .collect()
    }

    /// Probability that one forged disconnect is accepted while the target
    /// also transmits.
    pub fn disassoc_accept_prob(&self) -> Result<f64> {
        let Attack::Disassociation { eve, .. } = &self.attack else {
            return Ok(0.0);
        };
        let pla = self.pla_model()?;
        if !pla.is_enabled() {
            return Ok(COIN_FLIP);
        }
        let params = impersonation_params(&self.tagged_stats()?, &eve.stats(&self.deployment)?)?;
        Ok(md_l2_bounds(pla.threshold(), &params)?.upper)
    }

    fn others_pmf(&self, p_fa: f64) -> Result<Pmf> {
        let others = self.active.len() - 1;
        match self.options.nk {
            NkModel::AllScheduled => Ok(Pmf::point(others)),
            NkModel::Binomial => baseline_sched_dist(others, p_fa),
        }
    }

    /// Service of the tagged device with no attacker present.
    pub fn attack_free_service(&self) -> Result<ServiceModel> {
        let p_fa = self.pla_model()?.p_fa();
        let law = self.snr_law()?;
        let nk = nk_dist(&self.others_pmf(p_fa)?, self.n_frame)?;
        Ok(match nk.support() {
            [(n_k, _)] => ServiceModel::Baseline { p_fa, n_k: *n_k, law },
            _ => ServiceModel::Sybil { p_fa, nk, law },
        })
    }

    pub fn service(&self) -> Result<ServiceModel> {
        let p_fa = self.pla_model()?.p_fa();
        match &self.attack {
            Attack::None => self.attack_free_service(),
            Attack::Sybil { .. } => {
                let sybil = sybil_success_dist(&self.sybil_md_rates()?)?;
                let nk: NkPmf = nk_dist(&self.others_pmf(p_fa)?.convolve(&sybil), self.n_frame)?;
                Ok(ServiceModel::Sybil {
                    p_fa,
                    nk,
                    law: self.snr_law()?,
                })
            }
            Attack::Disassociation { p_attack, k_rc, .. } => Ok(ServiceModel::Disassoc {
                p_block: disassoc_block_prob(self.disassoc_accept_prob()?, *p_attack, *k_rc)?,
                k_rc: *k_rc,
                inner: Box::new(self.attack_free_service()?),
            }),
        }
    }

    /// Arrival rate giving utilization `u` of the attack-free service, so
    /// that attacks are compared at a fixed load.
    pub fn arrival_rate(&self, u: f64) -> Result<f64> {
        utilization_arrival_rate(u, &self.attack_free_service()?)
    }

    pub fn snc_scenario(&self, alpha: f64) -> Result<SncScenario> {
        let mut sc = SncScenario::new(alpha, self.service()?)?;
        sc.tol = self.options.tol;
        Ok(sc)
    }

    pub fn sim_config(&self, alpha: f64, n_frames: u64, seed: u64) -> Result<SimConfig> {
        let pla = self.pla_model()?;
        let scenario = match (&self.attack, pla.is_enabled()) {
            (Attack::None, true) => SimScenario::Baseline,
            (Attack::None, false) => SimScenario::NoPlaBaseline,
            (Attack::Sybil { eve, targets }, _) => SimScenario::Sybil {
                eve: eve.stats(&self.deployment)?,
                sybil_ids: targets
                    .iter()
                    .map(|t| self.deployment.device_stats(t))
                    .collect::<Result<_>>()?,
            },
            (Attack::Disassociation { eve, p_attack, k_rc }, true) => SimScenario::Disassociation {
                eve: eve.stats(&self.deployment)?,
                p_attack: *p_attack,
                k_rc: *k_rc,
            },
            (Attack::Disassociation { p_attack, k_rc, .. }, false) => SimScenario::NoPlaDisassociation {
                p_attack: *p_attack,
                k_rc: *k_rc,
            },
        };
        let cfg = SimConfig::new(
            scenario,
            self.tagged_stats()?,
            self.active.len() as u32 - 1,
            self.n_frame,
            pla.threshold(),
            alpha,
            n_frames,
            seed,
        );
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Sort key placing "D2" before "D10".
fn id_order(id: &str) -> (String, u64, String) {
    let split = id.find(|c: char| c.is_ascii_digit()).unwrap_or(id.len());
    let (head, tail) = id.split_at(split);
    let digits: String = tail.chars().take_while(|c| c.is_ascii_digit()).collect();
    let num = digits.parse().unwrap_or(u64::MAX);
    (head.to_string(), num, tail[digits.len()..].to_string())
}
