//! Frame-level Monte Carlo simulation of the authenticated uplink queue,
//! plus Monte Carlo estimators for the detection rates.

use std::collections::VecDeque;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::attacks::COIN_FLIP;
use crate::channel::{ChannelSampler, DeviceChannelStats, MAX_ANTENNAS};
use crate::error::{Error, Result};
use crate::par;
use crate::pla::{false_alarm_rate, Discriminant};

/// Largest delay, in frames, kept in the histogram; longer delays share
/// one overflow bin.
pub const DEFAULT_MAX_W: usize = 200;
/// Half-width of the reported interval in standard errors.
pub const CI_SIGMAS: f64 = 3.0;

/// Attack setting of a simulated link.
#[derive(Debug, Clone, PartialEq)]
pub enum SimScenario {
    Baseline,
    /// Eve presents every identity in `sybil_ids` each frame using one
    /// shared channel draw.
    Sybil {
        eve: DeviceChannelStats,
        sybil_ids: Vec<DeviceChannelStats>,
    },
    /// Eve sends a forged disconnect for the tagged device with
    /// probability `p_attack` per frame; acceptance silences the device
    /// for `k_rc` frames.
    Disassociation {
        eve: DeviceChannelStats,
        p_attack: f64,
        k_rc: u32,
    },
    NoPlaBaseline,
    /// Duplicate requests are resolved by a fair coin.
    NoPlaDisassociation { p_attack: f64, k_rc: u32 },
}

impl SimScenario {
    pub fn uses_pla(&self) -> bool {
        !matches!(self, Self::NoPlaBaseline | Self::NoPlaDisassociation { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::Sybil { .. } => "sybil",
            Self::Disassociation { .. } => "disassociation",
            Self::NoPlaBaseline => "no-pla-baseline",
            Self::NoPlaDisassociation { .. } => "no-pla-disassociation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Frames per replication.
    pub n_frames: u64,
    /// Leading frames per replication whose arrivals are not recorded.
    pub warmup: u64,
    pub seed: u64,
    pub replications: u32,
    pub scenario: SimScenario,
    /// Statistics of the tagged device.
    pub tagged: DeviceChannelStats,
    /// Other active devices sharing the frame.
    pub other_active: u32,
    pub n_frame: u32,
    /// Authentication threshold; ignored by the no-PLA scenarios.
    pub threshold: f64,
    /// Arrivals in bits per frame.
    pub alpha: f64,
    pub max_w: usize,
}

impl SimConfig {
    /// Config with a 10% warmup, one replication and the default histogram
    /// range.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        scenario: SimScenario,
        tagged: DeviceChannelStats,
        other_active: u32,
        n_frame: u32,
        threshold: f64,
        alpha: f64,
        n_frames: u64,
        seed: u64,
    ) -> Self {
        Self {
            n_frames,
            warmup: n_frames / 10,
            seed,
            replications: 1,
            scenario,
            tagged,
            other_active,
            n_frame,
            threshold,
            alpha,
            max_w: DEFAULT_MAX_W,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_frames <= self.warmup {
            return Err(Error::Config(format!(
                "n_frames {} must exceed warmup {}",
                self.n_frames, self.warmup
            )));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be ≥ 1".into()));
        }
        if self.n_frame == 0 {
            return Err(Error::Config("n_frame must be ≥ 1".into()));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!("arrival rate {} invalid", self.alpha)));
        }
        if !(self.threshold >= 0.0) {
            return Err(Error::Config(format!("threshold {} invalid", self.threshold)));
        }
        let n = self.tagged.n_rx();
        let check_p = |p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Config(format!("attack probability {p} outside [0, 1]")))
            }
        };
        match &self.scenario {
            SimScenario::Sybil { eve, sybil_ids } => {
                if eve.n_rx() != n || sybil_ids.iter().any(|s| s.n_rx() != n) {
                    return Err(Error::ShapeMismatch {
                        expected: n,
                        got: eve.n_rx(),
                    });
                }
                if sybil_ids.iter().any(|s| s.mean == self.tagged.mean && s.covariance == self.tagged.covariance) {
                    return Err(Error::Config("sybil identities overlap the tagged device".into()));
                }
                let max = self.other_active as usize + sybil_ids.len() + 1;
                if max > self.n_frame as usize {
                    return Err(Error::Config(format!("{max} contenders exceed {} symbols", self.n_frame)));
                }
            }
            SimScenario::Disassociation { eve, p_attack, k_rc } => {
                if eve.n_rx() != n {
                    return Err(Error::ShapeMismatch {
                        expected: n,
                        got: eve.n_rx(),
                    });
                }
                check_p(*p_attack)?;
                if *k_rc == 0 {
                    return Err(Error::Config("k_rc must be ≥ 1".into()));
                }
            }
            SimScenario::NoPlaDisassociation { p_attack, k_rc } => {
                check_p(*p_attack)?;
                if *k_rc == 0 {
                    return Err(Error::Config("k_rc must be ≥ 1".into()));
                }
            }
            SimScenario::Baseline | SimScenario::NoPlaBaseline => {}
        }
        Ok(())
    }

    fn effective_threshold(&self) -> f64 {
        if self.scenario.uses_pla() {
            self.threshold
        } else {
            f64::INFINITY
        }
    }
}

/// State after one simulated frame, passed to an optional probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameProbe {
    pub frame: u64,
    pub service: f64,
    pub cum_arrivals: f64,
    pub cum_departures: f64,
    pub backlog: f64,
}

/// Counters of protocol events over a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimEvents {
    pub frames: u64,
    pub tagged_rejected: u64,
    pub attacks: u64,
    pub attacks_accepted: u64,
    /// Two-message decisions with equal discriminants, resolved in favour of
    /// the legitimate message.
    pub ties: u64,
    pub outage_frames: u64,
    pub sybil_accepted: u64,
}

impl SimEvents {
    fn merge(&mut self, o: &SimEvents) {
        self.frames += o.frames;
        self.tagged_rejected += o.tagged_rejected;
        self.attacks += o.attacks;
        self.attacks_accepted += o.attacks_accepted;
        self.ties += o.ties;
        self.outage_frames += o.outage_frames;
        self.sybil_accepted += o.sybil_accepted;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationPoint {
    pub w: usize,
    pub empirical_p: f64,
    pub ci_halfwidth: f64,
    pub n_samples: u64,
}

/// Bit-weighted delay histogram and the derived violation curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    /// Bits by delay 0..=max_w.
    pub delay_bits: Vec<f64>,
    /// Bits with delay above max_w.
    pub overflow_bits: f64,
    /// Bits still queued at the end; counted at their age so far.
    pub censored_bits: f64,
    /// Post-warmup frames over all replications.
    pub n_samples: u64,
    pub events: SimEvents,
    pub mean_backlog: f64,
    pub violation_curve: Vec<ViolationPoint>,
}

impl SimTrace {
    pub fn total_bits(&self) -> f64 {
        self.delay_bits.iter().sum::<f64>() + self.overflow_bits
    }

    /// Empirical P(W > w); zero beyond the histogram range is not implied.
    pub fn violation(&self, w: usize) -> Option<f64> {
        self.violation_curve.get(w).map(|p| p.empirical_p)
    }

    fn finish(mut self) -> Self {
        let total = self.total_bits();
        let n = self.n_samples.max(1);
        // Suffix sums, so an empty tail is exactly zero.
        let mut tails = vec![0.0; self.delay_bits.len()];
        let mut acc = self.overflow_bits;
        for w in (0..self.delay_bits.len()).rev() {
            tails[w] = acc;
            acc += self.delay_bits[w];
        }
        self.violation_curve = tails
            .iter()
            .enumerate()
            .map(|(w, &tail)| {
                let p = if total > 0.0 { (tail / total).clamp(0.0, 1.0) } else { 0.0 };
                ViolationPoint {
                    w,
                    empirical_p: p,
                    ci_halfwidth: CI_SIGMAS * (p * (1.0 - p) / n as f64).sqrt(),
                    n_samples: self.n_samples,
                }
            })
            .collect();
        // Clean up rounding so the curve is exactly nonincreasing.
        for i in 1..self.violation_curve.len() {
            let prev = self.violation_curve[i - 1].empirical_p;
            let cur = &mut self.violation_curve[i].empirical_p;
            if *cur > prev {
                *cur = prev;
            }
        }
        self
    }

    /// CSV with header `w,empirical_p,ci_halfwidth,n_samples`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "w,empirical_p,ci_halfwidth,n_samples")?;
        for p in &self.violation_curve {
            writeln!(
                out,
                "{},{},{},{}",
                p.w,
                format_probability(p.empirical_p),
                format_probability(p.ci_halfwidth),
                p.n_samples
            )?;
        }
        Ok(())
    }
}

/// Probabilities below 1e-3 in scientific notation, others in plain
/// decimal.
pub fn format_probability(p: f64) -> String {
    if p == 0.0 {
        "0".to_string()
    } else if p.is_finite() && p.abs() < 1e-3 {
        format!("{p:.6e}")
    } else {
        format!("{p:.9}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Per-replication RNG: the master seed with the replication index as the
/// ChaCha stream.
pub fn replication_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs all replications and merges them in replication order.
pub fn run_link_sim(config: &SimConfig) -> Result<SimTrace> {
    config.validate()?;
    let parts = par::try_map_indexed(config.replications as usize, |r| replicate(config, r as u64, None))?;
    let mut merged = SimTrace {
        delay_bits: vec![0.0; config.max_w + 1],
        overflow_bits: 0.0,
        censored_bits: 0.0,
        n_samples: 0,
        events: SimEvents::default(),
        mean_backlog: 0.0,
        violation_curve: Vec::new(),
    };
    for p in &parts {
        for (a, b) in merged.delay_bits.iter_mut().zip(&p.delay_bits) {
            *a += b;
        }
        merged.overflow_bits += p.overflow_bits;
        merged.censored_bits += p.censored_bits;
        merged.n_samples += p.n_samples;
        merged.events.merge(&p.events);
        merged.mean_backlog += p.mean_backlog / parts.len() as f64;
    }
    Ok(merged.finish())
}

/// Single replication with a per-frame probe.
pub fn run_link_sim_probed(config: &SimConfig, probe: &mut dyn FnMut(&FrameProbe)) -> Result<SimTrace> {
    config.validate()?;
    Ok(replicate(config, 0, Some(probe))?.finish())
}

struct Party {
    disc: Discriminant,
}

fn replicate(config: &SimConfig, stream: u64, mut probe: Option<&mut dyn FnMut(&FrameProbe)>) -> Result<SimTrace> {
    let mut rng = replication_rng(config.seed, stream);
    let n = config.tagged.n_rx();
    let threshold = config.effective_threshold();
    let tagged_sampler = ChannelSampler::new(&config.tagged)?;
    let tagged = Party {
        disc: Discriminant::for_device(&config.tagged)?,
    };
    // Other active devices are scheduled independently with the false-alarm
    // probability of the shared threshold.
    let p_other = if threshold.is_finite() {
        1.0 - false_alarm_rate(threshold, n)?
    } else {
        1.0
    };
    let others = Binomial::new(config.other_active as u64, p_other)
        .map_err(|e| Error::Config(format!("binomial: {e}")))?;

    let (eve_sampler, sybils) = match &config.scenario {
        SimScenario::Sybil { eve, sybil_ids } => (
            Some(ChannelSampler::new(eve)?),
            sybil_ids
                .iter()
                .map(Discriminant::for_device)
                .collect::<Result<Vec<_>>>()?,
        ),
        SimScenario::Disassociation { eve, .. } => (Some(ChannelSampler::new(eve)?), Vec::new()),
        _ => (None, Vec::new()),
    };
    let (p_attack, k_rc) = match &config.scenario {
        SimScenario::Disassociation { p_attack, k_rc, .. } | SimScenario::NoPlaDisassociation { p_attack, k_rc } => {
            (*p_attack, *k_rc as u64)
        }
        _ => (0.0, 0),
    };

    let mut h = [Complex64::new(0.0, 0.0); MAX_ANTENNAS];
    let mut he = [Complex64::new(0.0, 0.0); MAX_ANTENNAS];
    let mut queue: VecDeque<(u64, f64)> = VecDeque::new();
    let mut backlog = 0.0;
    let mut cum_a = 0.0;
    let mut cum_d = 0.0;
    let mut outage_until = 0u64;
    let mut events = SimEvents::default();
    let mut trace = SimTrace {
        delay_bits: vec![0.0; config.max_w + 1],
        overflow_bits: 0.0,
        censored_bits: 0.0,
        n_samples: config.n_frames - config.warmup,
        events: SimEvents::default(),
        mean_backlog: 0.0,
        violation_curve: Vec::new(),
    };
    let mut backlog_sum = 0.0;

    for k in 0..config.n_frames {
        tagged_sampler.sample_into(&mut rng, &mut h[..n]);
        let d_i = tagged.disc.eval(&h[..n]);
        let mut pass = d_i <= threshold;
        if !pass {
            events.tagged_rejected += 1;
        }
        let mut contenders = others.sample(&mut rng);

        match &config.scenario {
            SimScenario::Sybil { .. } => {
                eve_sampler.as_ref().unwrap().sample_into(&mut rng, &mut he[..n]);
                let accepted = sybils.iter().filter(|d| d.eval(&he[..n]) <= threshold).count() as u64;
                events.sybil_accepted += accepted;
                contenders += accepted;
            }
            SimScenario::Disassociation { .. } => {
                if rng.gen::<f64>() < p_attack {
                    events.attacks += 1;
                    eve_sampler.as_ref().unwrap().sample_into(&mut rng, &mut he[..n]);
                    let d_e = tagged.disc.eval(&he[..n]);
                    if d_e == d_i {
                        events.ties += 1;
                    }
                    if d_e < d_i && d_e <= threshold {
                        events.attacks_accepted += 1;
                        outage_until = outage_until.max(k + k_rc);
                    }
                }
            }
            SimScenario::NoPlaDisassociation { .. } => {
                if rng.gen::<f64>() < p_attack {
                    events.attacks += 1;
                    if rng.gen::<f64>() < COIN_FLIP {
                        events.attacks_accepted += 1;
                        outage_until = outage_until.max(k + k_rc);
                    }
                }
            }
            SimScenario::Baseline | SimScenario::NoPlaBaseline => {}
        }
        if k < outage_until {
            events.outage_frames += 1;
            pass = false;
        }

        let service = if pass {
            let n_k = config.n_frame / (1 + contenders as u32);
            let snr: f64 = h[..n].iter().map(|z| z.norm_sqr()).sum();
            n_k as f64 * snr.ln_1p() / std::f64::consts::LN_2
        } else {
            0.0
        };

        // Serve bits that arrived in earlier frames.
        let mut left = service;
        while left > 0.0 {
            let Some(front) = queue.front_mut() else { break };
            let take = front.1.min(left);
            if front.0 >= config.warmup {
                let delay = (k - front.0) as usize;
                if delay <= config.max_w {
                    trace.delay_bits[delay] += take;
                } else {
                    trace.overflow_bits += take;
                }
            }
            front.1 -= take;
            left -= take;
            backlog -= take;
            cum_d += take;
            if front.1 <= 0.0 {
                queue.pop_front();
            }
        }
        if queue.is_empty() {
            backlog = 0.0;
        }
        if config.alpha > 0.0 {
            queue.push_back((k, config.alpha));
            backlog += config.alpha;
            cum_a += config.alpha;
        }
        if k >= config.warmup {
            backlog_sum += backlog;
        }
        if let Some(p) = probe.as_deref_mut() {
            p(&FrameProbe {
                frame: k,
                service,
                cum_arrivals: cum_a,
                cum_departures: cum_d,
                backlog,
            });
        }
    }
    // Bits still queued have waited at least until the end of the horizon.
    for &(arrival, bits) in &queue {
        if arrival >= config.warmup {
            let age = (config.n_frames - arrival) as usize;
            if age <= config.max_w {
                trace.delay_bits[age] += bits;
            } else {
                trace.overflow_bits += bits;
            }
            trace.censored_bits += bits;
        }
    }
    events.frames = config.n_frames;
    trace.events = events;
    trace.mean_backlog = backlog_sum / (config.n_frames - config.warmup) as f64;
    Ok(trace)
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n: u64,
}

impl Estimate {
    pub fn from_count(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            estimate: p,
            std_error: (p * (1.0 - p) / n as f64).sqrt(),
            n,
        }
    }
}

/// Estimated detection rates for one legitimate device and, optionally, an
/// attacker impersonating it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionMc {
    pub p_fa: Estimate,
    /// P(d(h_E) ≤ T).
    pub p_md: Option<Estimate>,
    /// P(d(h_E) < d(h_i)).
    pub p_confuse: Option<Estimate>,
    /// P(d(h_E) < d(h_i), d(h_E) ≤ T).
    pub p_md_l2: Option<Estimate>,
}

/// Number of independent RNG streams a Monte Carlo job is split into.
pub const MC_CHUNKS: u64 = 64;

/// Paired legitimate and attacker draws through the discriminant of
/// `legit`.
pub fn detection_mc(
    legit: &DeviceChannelStats,
    attacker: Option<&DeviceChannelStats>,
    threshold: f64,
    n_samples: u64,
    seed: u64,
) -> Result<DetectionMc> {
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be ≥ 1".into()));
    }
    let n = legit.n_rx();
    let disc = Discriminant::for_device(legit)?;
    let ls = ChannelSampler::new(legit)?;
    let es = attacker.map(ChannelSampler::new).transpose()?;
    if let Some(a) = attacker {
        if a.n_rx() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                got: a.n_rx(),
            });
        }
    }
    let counts = par::map_indexed(MC_CHUNKS as usize, |c| {
        let c = c as u64;
        let len = n_samples / MC_CHUNKS + u64::from(c < n_samples % MC_CHUNKS);
        let mut rng = replication_rng(seed, c);
        let mut h = [Complex64::new(0.0, 0.0); MAX_ANTENNAS];
        let mut he = [Complex64::new(0.0, 0.0); MAX_ANTENNAS];
        let mut k = [0u64; 4];
        for _ in 0..len {
            ls.sample_into(&mut rng, &mut h[..n]);
            let d_i = disc.eval(&h[..n]);
            k[0] += u64::from(d_i > threshold);
            if let Some(es) = &es {
                es.sample_into(&mut rng, &mut he[..n]);
                let d_e = disc.eval(&he[..n]);
                k[1] += u64::from(d_e <= threshold);
                k[2] += u64::from(d_e < d_i);
                k[3] += u64::from(d_e < d_i && d_e <= threshold);
            }
        }
        k
    });
    let mut total = [0u64; 4];
    for k in counts {
        for (t, v) in total.iter_mut().zip(k) {
            *t += v;
        }
    }
    let est = |i: usize| attacker.map(|_| Estimate::from_count(total[i], n_samples));
    Ok(DetectionMc {
        p_fa: Estimate::from_count(total[0], n_samples),
        p_md: est(1),
        p_confuse: est(2),
        p_md_l2: est(3),
    })
}

/// Mean number of accepted Sybil identities per frame when one shared
/// attacker channel is tested against every identity.
pub fn sybil_success_mc(
    eve: &DeviceChannelStats,
    sybil_ids: &[DeviceChannelStats],
    threshold: f64,
    n_frames: u64,
    seed: u64,
) -> Result<Estimate> {
    if n_frames < 2 {
        return Err(Error::Config("need at least two frames".into()));
    }
    let n = eve.n_rx();
    let es = ChannelSampler::new(eve)?;
    let discs = sybil_ids
        .iter()
        .map(Discriminant::for_device)
        .collect::<Result<Vec<_>>>()?;
    let sums = par::map_indexed(MC_CHUNKS as usize, |c| {
        let c = c as u64;
        let len = n_frames / MC_CHUNKS + u64::from(c < n_frames % MC_CHUNKS);
        let mut rng = replication_rng(seed, c);
        let mut he = [Complex64::new(0.0, 0.0); MAX_ANTENNAS];
        let (mut s1, mut s2) = (0u64, 0u64);
        for _ in 0..len {
            es.sample_into(&mut rng, &mut he[..n]);
            let k = discs.iter().filter(|d| d.eval(&he[..n]) <= threshold).count() as u64;
            s1 += k;
            s2 += k * k;
        }
        (s1, s2)
    });
    let (s1, s2) = sums.iter().fold((0u64, 0u64), |(a, b), (c, d)| (a + c, b + d));
    let nf = n_frames as f64;
    let mean = s1 as f64 / nf;
    let var = (s2 as f64 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    Ok(Estimate {
        estimate: mean,
        std_error: (var / nf).sqrt(),
        n: n_frames,
    })
}
