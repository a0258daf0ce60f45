//! The four subcommands. Each returns a table plus the errors of sweep
//! points that could not be computed; rows always follow sweep order.

use std::io::Write;

use pla_delay::channel::Deployment;
use pla_delay::par;
use pla_delay::pla::{chernoff_pd, impersonation_params, md_l2_bounds, missed_detection_rate};
use pla_delay::sim::{detection_mc, format_probability, run_link_sim, SimConfig, SimTrace};
use pla_delay::snc::KernelProfile;

use crate::config::{OverrideValue, ScenarioFile, Sweep};
use crate::error::{CliError, ErrorRecord, Result};

pub const DETECT_HEADER: [&str; 10] = [
    "sweep_var",
    "sweep_value",
    "device_id",
    "p_fa",
    "p_md",
    "chernoff_pd",
    "md_l2_lower",
    "md_l2_upper",
    "mc_estimate",
    "mc_stderr",
];

pub const DELAY_HEADER: [&str; 9] = [
    "sweep_var",
    "sweep_value",
    "w_epsilon",
    "w",
    "bound",
    "s_star",
    "stable",
    "sim_p",
    "sim_ci",
];

pub const SIMULATE_HEADER: [&str; 5] = ["w", "empirical_p", "ci_halfwidth", "n_samples", "bound"];

/// Command-line modifiers shared by all commands.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub sets: Vec<(String, OverrideValue)>,
    pub sweep: Option<Sweep>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    pub errors: Vec<ErrorRecord>,
}

/// Plain numbers: integers without a fraction, small magnitudes in
/// scientific notation.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:.6e}")
    } else {
        format!("{x}")
    }
}

/// One scenario per sweep point, with the command-line overrides applied.
struct Point {
    var: String,
    value: String,
    label: Option<String>,
    scenario: Result<ScenarioFile>,
    seed: u64,
}

fn points(base: &ScenarioFile, opts: &RunOptions) -> Result<Vec<Point>> {
    let mut base = base.with_overrides(opts.sets.iter().map(|(k, v)| (k.as_str(), v.clone())))?;
    if let Some(seed) = opts.seed {
        base.sim.seed = seed;
    }
    let seed = base.sim.seed;
    Ok(match &opts.sweep {
        None => vec![Point {
            var: String::new(),
            value: String::new(),
            label: None,
            scenario: Ok(base),
            seed,
        }],
        Some(sw) => sw
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| Point {
                var: sw.var.clone(),
                value: format_number(v),
                label: Some(format!("{}={}", sw.var, format_number(v))),
                scenario: base.with_overrides([(sw.var.as_str(), OverrideValue::Number(v))]),
                seed: seed.wrapping_add(i as u64),
            })
            .collect(),
    })
}

fn run_points(
    base: &ScenarioFile,
    opts: &RunOptions,
    header: &[&str],
    rows: impl Fn(&ScenarioFile, u64) -> Result<Vec<Vec<String>>> + Sync + Send,
) -> Result<Outcome> {
    let pts = points(base, opts)?;
    let results = par::map_slice(&pts, |p| {
        let sc = p.scenario.as_ref().map_err(|e| CliError::Config(e.to_string()))?;
        rows(sc, p.seed)
    });
    let mut table = Table::new(header);
    let mut errors = Vec::new();
    for (p, r) in pts.iter().zip(results) {
        match r {
            Ok(rs) => table.rows.extend(rs.into_iter().map(|mut row| {
                row.insert(0, p.value.clone());
                row.insert(0, p.var.clone());
                row
            })),
            Err(e) => errors.push(ErrorRecord::new(&e, p.label.clone())),
        }
    }
    Ok(Outcome { table, errors })
}

/// Deployment file for the scenario's grid, as TOML.
pub fn deployment(base: &ScenarioFile, opts: &RunOptions) -> Result<String> {
    let sc = base.with_overrides(opts.sets.iter().map(|(k, v)| (k.as_str(), v.clone())))?;
    if opts.sweep.is_some() {
        return Err(CliError::Config("deployment does not take --sweep".into()));
    }
    let b = &sc.deployment;
    let dep = match &b.file {
        Some(_) => sc.deployment()?,
        None => Deployment::grid(b.grid, b.n_rx, b.rice_k_db, b.corr)?,
    };
    toml::to_string(&dep).map_err(|e| CliError::Config(e.to_string()))
}

pub fn detect(base: &ScenarioFile, opts: &RunOptions) -> Result<Outcome> {
    run_points(base, opts, &DETECT_HEADER, detect_rows)
}

fn detect_rows(sc: &ScenarioFile, seed: u64) -> Result<Vec<Vec<String>>> {
    let dep = sc.deployment()?;
    let eve = sc.eve()?.stats(&dep)?;
    let pla = sc.pla.model(dep.array.n_rx)?;
    let t = pla.threshold();
    let ids = if sc.detect.devices.is_empty() {
        vec![sc.link.tagged.clone()]
    } else {
        sc.detect.devices.clone()
    };
    let mut rows = Vec::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        let legit = dep.device_stats(id)?;
        let params = impersonation_params(&legit, &eve)?;
        let b = md_l2_bounds(t, &params)?;
        let (mc, se) = if sc.detect.mc_samples > 0 {
            let m = detection_mc(&legit, Some(&eve), t, sc.detect.mc_samples, seed.wrapping_add(1000 * i as u64))?;
            let e = m.p_md_l2.expect("attacker given");
            (format_probability(e.estimate), format_probability(e.std_error))
        } else {
            (String::new(), String::new())
        };
        rows.push(vec![
            id.clone(),
            format_probability(pla.p_fa()),
            format_probability(missed_detection_rate(t, &params)?),
            format_probability(chernoff_pd(&params)),
            format_probability(b.lower),
            format_probability(b.upper),
            mc,
            se,
        ]);
    }
    Ok(rows)
}

fn arrival_rate(sc: &ScenarioFile, ex: &pla_delay::scenario::Experiment) -> Result<f64> {
    match sc.snc.alpha {
        Some(a) => Ok(a),
        None => Ok(ex.arrival_rate(sc.snc.utilization)?),
    }
}

fn sim_config(sc: &ScenarioFile, ex: &pla_delay::scenario::Experiment, alpha: f64, seed: u64) -> Result<SimConfig> {
    let mut cfg = ex.sim_config(alpha, sc.sim.frames, seed)?;
    if let Some(w) = sc.sim.warmup {
        cfg.warmup = w;
    }
    cfg.replications = sc.sim.replications;
    cfg.max_w = sc.sim.max_w;
    cfg.validate()?;
    Ok(cfg)
}

pub fn delay(base: &ScenarioFile, opts: &RunOptions) -> Result<Outcome> {
    run_points(base, opts, &DELAY_HEADER, delay_rows)
}

fn delay_rows(sc: &ScenarioFile, seed: u64) -> Result<Vec<Vec<String>>> {
    let ex = sc.experiment()?;
    let alpha = arrival_rate(sc, &ex)?;
    let scn = ex.snc_scenario(alpha)?;
    let prof = KernelProfile::new(&scn)?;
    let g = prof.delay_guarantee(sc.snc.epsilon)?;
    let ws: Vec<Option<u64>> = if sc.snc.w_max >= sc.snc.w_min && sc.snc.w_max > 0 {
        (sc.snc.w_min..=sc.snc.w_max).map(Some).collect()
    } else {
        vec![g.frames()]
    };
    let trace: Option<SimTrace> = if sc.sim.overlay {
        Some(run_link_sim(&sim_config(sc, &ex, alpha, seed)?)?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(ws.len());
    for w in ws {
        let (bound, s_star, stable) = match w {
            Some(w) => {
                let r = prof.delay_bound_frames(w)?;
                (format_probability(r.bound), format_number(r.s_star), r.stable)
            }
            None => ("1".to_string(), String::new(), prof.stable()),
        };
        let (sim_p, sim_ci) = match (&trace, w) {
            (Some(t), Some(w)) => match t.violation_curve.get(w as usize) {
                Some(p) => (format_probability(p.empirical_p), format_probability(p.ci_halfwidth)),
                None => (String::new(), String::new()),
            },
            _ => (String::new(), String::new()),
        };
        rows.push(vec![
            g.to_string(),
            w.map(|w| w.to_string()).unwrap_or_default(),
            bound,
            s_star,
            stable.to_string(),
            sim_p,
            sim_ci,
        ]);
    }
    Ok(rows)
}

/// Empirical violation curve with the analytical bound alongside.
pub fn simulate(base: &ScenarioFile, opts: &RunOptions) -> Result<Outcome> {
    if opts.sweep.is_some() {
        return Err(CliError::Config("simulate does not take --sweep".into()));
    }
    let pts = points(base, opts)?;
    let p = pts.into_iter().next().expect("one point");
    let sc = p.scenario?;
    let ex = sc.experiment()?;
    let alpha = arrival_rate(&sc, &ex)?;
    let trace = run_link_sim(&sim_config(&sc, &ex, alpha, p.seed)?)?;
    let scn = ex.snc_scenario(alpha)?;
    let prof = KernelProfile::new(&scn)?;
    let mut table = Table::new(&SIMULATE_HEADER);
    for v in &trace.violation_curve {
        table.rows.push(vec![
            v.w.to_string(),
            format_probability(v.empirical_p),
            format_probability(v.ci_halfwidth),
            v.n_samples.to_string(),
            format_probability(prof.delay_bound_frames(v.w as u64)?.bound),
        ]);
    }
    Ok(Outcome {
        table,
        errors: Vec::new(),
    })
}
