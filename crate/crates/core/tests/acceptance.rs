//! End-to-end acceptance checks, one line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 3 5`. A criterion in
//! `KNOWN_FAILURES` still prints FAIL but does not fail the run unless
//! `ACCEPTANCE_STRICT=1` is set; one that starts passing fails the run so the
//! list gets updated.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use pla_delay::attacks::{baseline_sched_dist, nk_dist, sched_dist_under_sybil, sybil_success_dist, Pmf};
use pla_delay::channel::{snr_moments, Deployment};
use pla_delay::pla::{chernoff_pd, md_l2_bounds, missed_detection_rate, threshold_for_fa, ImpersonationParams};
use pla_delay::scenario::{Attack, EvePlacement, Experiment, PlaSetting};
use pla_delay::sim::{detection_mc, run_link_sim, run_link_sim_probed, sybil_success_mc};
use pla_delay::snc::{gamma_approx_params, mellin_g_oracle, mellin_g_series, steady_kernel, KernelProfile};
use pla_delay::specfun::{chi2_cdf, noncentral_chi2_cdf, poisson_binomial_pmf, upper_incomplete_gamma, RealTolerance};
use pla_delay::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{reference_deployment, synthetic_pair, three_sigma};

/// Criteria that fail with the current model; see the project notes.
const KNOWN_FAILURES: &[u32] = &[8];

const EPSILON: f64 = 1e-6;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Result<Verdict>,
}

fn pla(p_fa: f64) -> PlaSetting {
    PlaSetting::FalseAlarm { p_fa }
}

fn guarantee(ex: &Experiment, alpha: f64) -> Result<Option<u64>> {
    let scn = ex.snc_scenario(alpha)?;
    Ok(KernelProfile::new(&scn)?.delay_guarantee(EPSILON)?.frames())
}

fn show(w: Option<u64>) -> String {
    w.map_or("unb".into(), |w| w.to_string())
}

fn show_all(ws: &[Option<u64>]) -> String {
    ws.iter().map(|w| show(*w)).collect::<Vec<_>>().join(",")
}

fn detection_closed_forms() -> Result<Verdict> {
    const FA_DRAWS: u64 = 10_000_000;
    const MD_DRAWS: u64 = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let configs: Vec<(f64, f64)> = (0..10)
        .map(|_| (rng.gen_range(0.2..5.0), rng.gen_range(0.0..50.0)))
        .collect();
    let (mut ok, mut checks, mut worst) = (true, 0, 0.0f64);
    for n_rx in [1, 4, 8] {
        let legit = reference_deployment(n_rx, 6.0, 0.0).device_stats("D12")?;
        for p_fa in [1e-1, 1e-2] {
            let t = threshold_for_fa(p_fa, n_rx)?;
            let fa = detection_mc(&legit, None, t, FA_DRAWS, 10 * n_rx as u64)?.p_fa;
            let z = (fa.estimate - p_fa).abs() / (three_sigma(p_fa, FA_DRAWS) / 3.0);
            worst = worst.max(z);
            ok &= z <= 3.0;
            checks += 1;
            for (i, &(lambda, nu)) in configs.iter().enumerate() {
                let (l, e) = synthetic_pair(lambda, nu, n_rx, 0.0);
                let want = missed_detection_rate(t, &ImpersonationParams::new(lambda, nu, n_rx)?)?;
                let got = detection_mc(&l, Some(&e), t, MD_DRAWS, 1000 + i as u64)?.p_md.expect("attacker");
                let sd = three_sigma(want, MD_DRAWS) / 3.0;
                let z = if sd > 0.0 {
                    (got.estimate - want).abs() / sd
                } else if got.estimate == want {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst = worst.max(z);
                ok &= z <= 3.0;
                checks += 1;
            }
        }
    }
    Ok(Verdict::new(ok, format!("{checks} checks, worst deviation {worst:.2}σ")))
}

fn chernoff_dominance() -> Result<Verdict> {
    const DRAWS: u64 = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut ok, mut min_margin) = (true, f64::INFINITY);
    for i in 0..20 {
        let lambda = rng.gen_range(0.2..5.0);
        let nu = rng.gen_range(0.0..50.0);
        let n_rx = [2, 4, 8][rng.gen_range(0..3)];
        let (l, e) = synthetic_pair(lambda, nu, n_rx, 0.0);
        let bound = chernoff_pd(&ImpersonationParams::new(lambda, nu, n_rx)?);
        let mc = detection_mc(&l, Some(&e), 1.0, DRAWS, 2000 + i)?.p_confuse.expect("attacker");
        let margin = bound - (mc.estimate - 3.0 * mc.std_error);
        min_margin = min_margin.min(margin);
        ok &= margin >= 0.0;
    }
    Ok(Verdict::new(ok, format!("20 configs, smallest margin {min_margin:.3e}")))
}

fn l2_sandwich() -> Result<Verdict> {
    const DRAWS: u64 = 4_000_000;
    let dep = reference_deployment(4, 6.0, 0.0);
    let legit = dep.device_stats("D12")?;
    let t = threshold_for_fa(1e-2, 4)?;
    let (mut inside, mut tight, mut worst_gap) = (true, true, 0.0f64);
    let mut rows = Vec::new();
    for i in 0..=10 {
        let aoa = PI / 4.0 + i as f64 * PI / 20.0;
        let eve = EvePlacement::Polar {
            distance: 30.0,
            aoa,
            rice_k_db: 0.0,
        }
        .stats(&dep)?;
        let b = md_l2_bounds(t, &pla_delay::pla::impersonation_params(&legit, &eve)?)?;
        let mc = detection_mc(&legit, Some(&eve), t, DRAWS, 3000 + i)?.p_md_l2.expect("attacker");
        let sd = mc.std_error;
        inside &= mc.estimate + 3.0 * sd >= b.lower && mc.estimate - 3.0 * sd <= b.upper;
        let gap = (b.upper / mc.estimate).log10();
        worst_gap = worst_gap.max(gap);
        tight &= gap <= 2.0;
        rows.push(format!("{:.2}π:{:.1e}", aoa / PI, mc.estimate));
    }
    Ok(Verdict::new(
        inside && tight,
        format!(
            "inside={inside}, largest upper/MC gap {worst_gap:.2} decades; MC {}",
            rows.join(" ")
        ),
    ))
}

fn series_vs_oracle() -> Result<Verdict> {
    let tol = RealTolerance::new(1e-10, 200)?;
    let (mut worst, mut max_terms, mut n) = (0.0f64, 0, 0);
    for k_db in [0.0, 6.0] {
        for corr in [0.0, 0.5] {
            let dep = reference_deployment(4, k_db, corr);
            for d in &dep.devices {
                let g = gamma_approx_params(snr_moments(&dep.device_stats(&d.id)?))?;
                for i in 0..30 {
                    let s = 0.2 + 2.8 * i as f64 / 29.0;
                    let series = mellin_g_series(s, g, tol)?;
                    let oracle = mellin_g_oracle(s, g)?;
                    worst = worst.max(((series.value - oracle) / oracle).abs());
                    max_terms = max_terms.max(series.terms);
                    n += 1;
                }
            }
        }
    }
    Ok(Verdict::new(
        worst <= 1e-4 && max_terms <= 200,
        format!("{n} points, worst relative error {worst:.2e}, at most {max_terms} terms"),
    ))
}

fn validation_experiments(dep: &Deployment) -> Vec<(&'static str, Experiment)> {
    let base = Experiment::new(dep.clone(), "D12", pla(1e-2));
    vec![
        ("baseline", base.clone()),
        (
            "sybil",
            base.clone().with_attack(Attack::Sybil {
                eve: EvePlacement::Device { id: "D4".into() },
                targets: ["D1", "D2", "D3", "D5"].iter().map(|s| s.to_string()).collect(),
            }),
        ),
        (
            "disassoc",
            base.with_attack(Attack::Disassociation {
                eve: EvePlacement::Polar {
                    distance: 25.0,
                    aoa: PI / 3.0,
                    rice_k_db: 0.0,
                },
                p_attack: 1.0,
                k_rc: 4,
            }),
        ),
    ]
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn bound_dominance_and_slope() -> Result<Verdict> {
    const FRAMES: u64 = 10_000_000;
    let dep = reference_deployment(4, 6.0, 0.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (name, ex)) in validation_experiments(&dep).into_iter().enumerate() {
        let alpha = ex.arrival_rate(0.5)?;
        let trace = run_link_sim(&ex.sim_config(alpha, FRAMES, 4000 + i as u64)?)?;
        let scn = ex.snc_scenario(alpha)?;
        let prof = KernelProfile::new(&scn)?;
        let (mut dominated, mut ws, mut emp, mut bnd) = (true, Vec::new(), Vec::new(), Vec::new());
        for v in &trace.violation_curve {
            let b = prof.delay_bound_frames(v.w as u64)?.bound;
            if v.empirical_p >= 1e-4 {
                dominated &= b >= v.empirical_p;
            }
            // Slopes are fitted where both curves show on a log plot: past
            // the trivial w = 0 point and while the estimate is resolved.
            if v.w >= 1 && v.empirical_p > v.ci_halfwidth {
                ws.push(v.w as f64);
                emp.push(v.empirical_p.log10());
                bnd.push(b.log10());
            }
        }
        let (se, sb) = if ws.len() >= 2 {
            (slope(&ws, &emp), slope(&ws, &bnd))
        } else {
            (f64::NAN, f64::NAN)
        };
        let ratio = sb / se;
        let gap = bnd.iter().zip(&emp).map(|(b, e)| b - e).fold(0.0, f64::max);
        let pass = dominated && (0.5..=2.0).contains(&ratio) && gap <= 4.0;
        ok &= pass;
        parts.push(format!(
            "{name}: dominated={dominated} slopes {sb:.3}/{se:.3} over {} pts, max gap {gap:.2} decades",
            ws.len()
        ));
    }
    Ok(Verdict::new(ok, parts.join("; ")))
}

fn baseline_vs_false_alarm() -> Result<Verdict> {
    let dep = reference_deployment(4, 6.0, 0.0);
    let grid = [1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
    let mut ok = true;
    let mut parts = Vec::new();
    for u in [0.5, 0.9] {
        let ws: Vec<Option<u64>> = grid
            .iter()
            .map(|&p| {
                let ex = Experiment::new(dep.clone(), "D12", pla(p));
                guarantee(&ex, ex.arrival_rate(u)?)
            })
            .collect::<Result<_>>()?;
        let finite: Option<Vec<u64>> = ws.iter().copied().collect();
        let pass = match &finite {
            Some(ws) => {
                let rise = ws[6] as i64 - ws[0] as i64;
                ws.windows(2).all(|p| p[1] >= p[0]) && (1..=8).contains(&rise)
            }
            None => false,
        };
        ok &= pass;
        parts.push(format!("u={u}: w_ε {}", show_all(&ws)));
    }
    Ok(Verdict::new(ok, parts.join("; ")))
}

fn sybil_experiment(p: PlaSetting, n: usize) -> Experiment {
    let dep = reference_deployment(4, 6.0, 0.0);
    let eve = EvePlacement::Device { id: "D4".into() };
    let mut ex = Experiment::new(dep, "D12", p);
    let targets = ex.sybil_candidates(&eve)[..n].to_vec();
    ex.attack = Attack::Sybil { eve, targets };
    ex
}

fn sybil_approximation() -> Result<Verdict> {
    const FRAMES: u64 = 1_000_000;
    let mut ok = true;
    let mut parts = Vec::new();
    for p_fa in [1e-1, 1e-2] {
        for n in [2, 6, 10, 14] {
            let ex = sybil_experiment(pla(p_fa), n);
            let approx = sybil_success_dist(&ex.sybil_md_rates()?)?.mean();
            let Attack::Sybil { eve, targets } = &ex.attack else { unreachable!() };
            let eve = eve.stats(&ex.deployment)?;
            let ids = targets
                .iter()
                .map(|t| ex.deployment.device_stats(t))
                .collect::<Result<Vec<_>>>()?;
            let t = ex.pla_model()?.threshold();
            let mc = sybil_success_mc(&eve, &ids, t, FRAMES, 5000 + n as u64)?;
            let rel = (approx - mc.estimate).abs() / mc.estimate;
            ok &= rel <= 0.05;
            parts.push(format!("p_fa={p_fa} n={n}: {approx:.3} vs {:.3}", mc.estimate));
        }
    }
    for n in [2, 6, 10, 14] {
        let ex = sybil_experiment(PlaSetting::Disabled, n);
        let approx = sybil_success_dist(&ex.sybil_md_rates()?)?.mean();
        let Attack::Sybil { eve, targets } = &ex.attack else { unreachable!() };
        let eve = eve.stats(&ex.deployment)?;
        let ids = targets
            .iter()
            .map(|t| ex.deployment.device_stats(t))
            .collect::<Result<Vec<_>>>()?;
        let mc = sybil_success_mc(&eve, &ids, f64::INFINITY, FRAMES, 6000 + n as u64)?;
        ok &= approx == n as f64 && mc.estimate == n as f64;
    }
    parts.push("no PLA exact".into());
    Ok(Verdict::new(ok, parts.join("; ")))
}

fn sybil_flattening() -> Result<Verdict> {
    let mut curves = Vec::new();
    for setting in [pla(1e-2), PlaSetting::Disabled] {
        let alpha = sybil_experiment(setting, 0).arrival_rate(0.9)?;
        let ws: Vec<Option<u64>> = (0..=14)
            .map(|n| guarantee(&sybil_experiment(setting, n), alpha))
            .collect::<Result<_>>()?;
        curves.push(ws);
    }
    let with = &curves[0];
    let flat = match with.iter().copied().collect::<Option<Vec<u64>>>() {
        Some(ws) => ws.iter().max().unwrap() - ws.iter().min().unwrap() <= 4,
        None => false,
    };
    let blows_up = curves[1][..=8].iter().any(Option::is_none);
    Ok(Verdict::new(
        flat && blows_up,
        format!(
            "PLA flat={flat} [{}]; no PLA unbounded by 8={blows_up} [{}]",
            show_all(with),
            show_all(&curves[1])
        ),
    ))
}

fn disassoc_experiment(n_rx: usize, p: PlaSetting, p_attack: f64) -> Experiment {
    let dep = reference_deployment(n_rx, 6.0, 0.0);
    Experiment::new(dep, "D12", p).with_attack(Attack::Disassociation {
        eve: EvePlacement::Polar {
            distance: 25.0,
            aoa: PI / 3.0,
            rice_k_db: 0.0,
        },
        p_attack,
        k_rc: 4,
    })
}

fn disassoc_curve(n_rx: usize, p: PlaSetting, u: f64, grid: &[f64]) -> Result<Vec<Option<u64>>> {
    let alpha = disassoc_experiment(n_rx, p, 0.0).arrival_rate(u)?;
    grid.iter()
        .map(|&pa| guarantee(&disassoc_experiment(n_rx, p, pa), alpha))
        .collect()
}

fn disassoc_mitigation() -> Result<Verdict> {
    let grid = [0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0];
    let mut parts = Vec::new();
    let mut verdict = false;
    for u in [0.9, 0.5] {
        let open = disassoc_curve(4, PlaSetting::Disabled, u, &grid)?;
        let guarded = disassoc_curve(8, pla(1e-2), u, &grid)?;
        let w0 = open[0].expect("attack-free link is stable");
        let escalates = grid
            .iter()
            .zip(&open)
            .any(|(&p, w)| p <= 0.1 && w.map_or(true, |w| w > 5 * w0));
        let contained = match (guarded[0], guarded[grid.len() - 1]) {
            (Some(a), Some(b)) => b <= a + 3,
            _ => false,
        };
        if u == 0.9 {
            verdict = escalates && contained;
        }
        parts.push(format!(
            "u={u}: no PLA [{}] escalates={escalates}; PLA N_Rx=8 [{}] contained={contained}",
            show_all(&open),
            show_all(&guarded)
        ));
    }
    Ok(Verdict::new(verdict, parts.join("; ")))
}

fn property_suite() -> Result<Verdict> {
    let mut failed: Vec<&str> = Vec::new();
    let mut check = |name: &'static str, ok: bool| {
        if !ok {
            failed.push(name);
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(10);

    let mut pmf_ok = true;
    let mut conv_ok = true;
    for _ in 0..200 {
        let n = rng.gen_range(0..30);
        let p_fa = rng.gen_range(0.0..=1.0);
        let md: Vec<f64> = (0..rng.gen_range(0..20)).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let base = baseline_sched_dist(n, p_fa)?;
        let sybil = sybil_success_dist(&md)?;
        let joint = sched_dist_under_sybil(&base, &sybil);
        let nk = nk_dist(&joint, 288)?;
        for p in [base.as_slice(), sybil.as_slice(), joint.as_slice()] {
            pmf_ok &= p.iter().all(|x| *x >= 0.0) && (p.iter().sum::<f64>() - 1.0).abs() <= 1e-12;
        }
        pmf_ok &= (nk.total() - 1.0).abs() <= 1e-12;
        conv_ok &= sched_dist_under_sybil(&base, &Pmf::point(0)) == base;
    }
    check("pmf normalization", pmf_ok);
    check("convolution identity", conv_ok);

    let mut brute_ok = true;
    for n in 0..=12 {
        let probs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let pmf = poisson_binomial_pmf(&probs)?;
        let mut brute = vec![0.0; n + 1];
        for mask in 0u32..(1 << n) {
            let p: f64 = probs
                .iter()
                .enumerate()
                .map(|(i, q)| if mask >> i & 1 == 1 { *q } else { 1.0 - q })
                .product();
            brute[mask.count_ones() as usize] += p;
        }
        brute_ok &= pmf.iter().zip(&brute).all(|(a, b)| (a - b).abs() <= 1e-12);
    }
    check("poisson-binomial enumeration", brute_ok);

    let mut cdf_ok = true;
    for k in [2, 4, 8, 16, 64, 128] {
        let mut prev = 0.0;
        for i in 0..300 {
            let x = 0.05 * i as f64 * (1.0 + 0.02 * i as f64);
            let f = chi2_cdf(k, x)?;
            cdf_ok &= (0.0..=1.0).contains(&f) && f >= prev;
            cdf_ok &= (noncentral_chi2_cdf(k, 0.0, x)? - f).abs() <= 1e-10;
            let mut prev_nc = 1.0;
            for nc in [0.5, 2.0, 8.0, 30.0] {
                let g = noncentral_chi2_cdf(k, nc, x)?;
                cdf_ok &= g <= prev_nc + 1e-15;
                prev_nc = g;
            }
            prev = f;
        }
    }
    check("CDF monotonicity", cdf_ok);

    let mut gamma_ok = true;
    for s in [-2.3, -0.5, 0.7, 3.1] {
        for x in [0.1, 1.0, 10.0] {
            let lhs = upper_incomplete_gamma(s + 1.0, x)?;
            let rhs = s * upper_incomplete_gamma(s, x)? + x.powf(s) * (-x).exp();
            gamma_ok &= ((lhs - rhs) / lhs).abs() <= 1e-8;
        }
    }
    check("incomplete-gamma recurrence", gamma_ok);

    let dep = reference_deployment(4, 6.0, 0.0);
    let mut convex_ok = true;
    for (_, ex) in validation_experiments(&dep) {
        let scn = ex.snc_scenario(ex.arrival_rate(0.7)?)?;
        let s_max = KernelProfile::new(&scn)?.s_max();
        for _ in 0..300 {
            let a = rng.gen_range(0.0..s_max);
            let b = rng.gen_range(0.0..s_max);
            if a.min(b) <= 0.0 {
                continue;
            }
            let w = rng.gen_range(0..40);
            let fm = steady_kernel(0.5 * (a + b), w, &scn)?;
            let avg = 0.5 * (steady_kernel(a, w, &scn)? + steady_kernel(b, w, &scn)?);
            convex_ok &= fm <= avg * (1.0 + 1e-9);
        }
    }
    check("kernel convexity", convex_ok);

    let mut flow_ok = true;
    let mut seed_ok = true;
    for (i, (_, ex)) in validation_experiments(&dep).into_iter().enumerate() {
        for u in [0.5, 0.9, 1.2] {
            let alpha = ex.arrival_rate(0.5)? * u / 0.5;
            let mut cfg = ex.sim_config(alpha, 50_000, 7000 + i as u64)?;
            run_link_sim_probed(&cfg, &mut |p| {
                let slack = 1e-9 * p.cum_arrivals.max(1.0);
                flow_ok &= p.backlog >= 0.0
                    && p.cum_departures <= p.cum_arrivals + slack
                    && (p.cum_arrivals - p.cum_departures - p.backlog).abs() <= slack;
            })?;
            cfg.replications = 2;
            seed_ok &= run_link_sim(&cfg)? == run_link_sim(&cfg)?;
        }
    }
    check("flow conservation", flow_ok);
    check("seed determinism", seed_ok);

    Ok(if failed.is_empty() {
        Verdict::new(true, "pmfs, convolution, CDFs, recurrence, convexity, flow, seeds")
    } else {
        Verdict::new(false, format!("failed: {}", failed.join(", ")))
    })
}

fn criteria() -> Vec<Criterion> {
    let min = |m: u64| Duration::from_secs(60 * m);
    vec![
        Criterion { id: 1, name: "detection closed forms vs MC", limit: min(2), run: detection_closed_forms },
        Criterion { id: 2, name: "Chernoff dominance", limit: min(1), run: chernoff_dominance },
        Criterion { id: 3, name: "two-message sandwich", limit: min(5), run: l2_sandwich },
        Criterion { id: 4, name: "Mellin series vs quadrature", limit: min(1), run: series_vs_oracle },
        Criterion { id: 5, name: "bound dominance and slope", limit: min(30), run: bound_dominance_and_slope },
        Criterion { id: 6, name: "baseline delay vs false alarms", limit: min(2), run: baseline_vs_false_alarm },
        Criterion { id: 7, name: "Sybil success approximation", limit: min(3), run: sybil_approximation },
        Criterion { id: 8, name: "Sybil delay flattening", limit: min(3), run: sybil_flattening },
        Criterion { id: 9, name: "disassociation mitigation", limit: min(3), run: disassoc_mitigation },
        Criterion { id: 10, name: "property suite", limit: min(2), run: property_suite },
    ]
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let (mut passed, mut known, mut unexpected) = (0, 0, Vec::new());
    for c in criteria() {
        if !selected.is_empty() && !selected.contains(&c.id) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(v) => (v.pass && took <= c.limit, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let is_known = KNOWN_FAILURES.contains(&c.id);
        let tag = match (pass, is_known) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as known failure)",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!(
            "criterion {:>2} {:<32} {tag} [{:.1}s] {detail}",
            c.id,
            c.name,
            took.as_secs_f64()
        );
        match (pass, is_known) {
            (true, false) => passed += 1,
            (false, true) if !strict => known += 1,
            _ => unexpected.push(c.id),
        }
    }
    println!("acceptance: {passed} passed, {known} known failures, {} unexpected", unexpected.len());
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
