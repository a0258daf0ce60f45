//! Integration of positive, peaked integrands given in log form, built on
//! the double-exponential rule from the `quadrature` crate.

use crate::error::{Error, Result};

const SCAN_POINTS: usize = 480;
/// Decades below the upper end covered by the scan.
const SCAN_DECADES: f64 = 12.0;
const LOG_CUTOFF: f64 = 60.0;
const MAX_SEGMENTS: usize = 40;
const MAX_DEPTH: u32 = 14;
const ZOOM_ROUNDS: usize = 8;
const MIN_COVERED: usize = 24;
const NOISE_FLOOR: f64 = 1e-8;

/// ln ∫₀^∞ exp(log_f(y)) dy.
///
/// `scale` is a rough location of the mass. The integrand is scanned on a
/// log-spaced grid that is widened until it has dropped `LOG_CUTOFF` nats
/// below its peak at the upper end; the region above that cutoff is then
/// split into segments along the grid and integrated piecewise.
pub fn ln_integrate_semi_infinite(log_f: impl Fn(f64) -> f64, scale: f64, rel_tol: f64) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Quadrature(format!("bad scale {scale}")));
    }
    let mut hi = 4.0 * scale;
    let mut tries = 0;
    let (grid, peak) = loop {
        let (grid, peak) = scan(&log_f, hi);
        let tail = grid[grid.len() - 1].1;
        if peak.is_finite() && tail < peak - LOG_CUTOFF {
            break (grid, peak);
        }
        hi *= 4.0;
        tries += 1;
        if tries > 40 {
            return Err(Error::Quadrature("integrand does not decay".into()));
        }
    };
    let first = grid.iter().position(|&(_, v)| v > peak - LOG_CUTOFF).unwrap();
    let last = grid.iter().rposition(|&(_, v)| v > peak - LOG_CUTOFF).unwrap();
    let mut a = if first == 0 { 0.0 } else { grid[first - 1].0 };
    let mut b = grid[(last + 1).min(grid.len() - 1)].0;
    let mut cuts: Vec<f64> = Some(a)
        .into_iter()
        .chain(grid[first..=last].iter().map(|&(y, _)| y).filter(|&y| y > a && y < b))
        .chain(Some(b))
        .collect();
    let (mut fine, mut peak) = (grid, peak);

    // A peak much narrower than the log grid spacing is resolved by
    // repeated linear scans of the bracketing interval.
    for _ in 0..ZOOM_ROUNDS {
        let covered = fine.iter().filter(|&&(_, v)| v > peak - LOG_CUTOFF).count();
        if covered >= MIN_COVERED {
            break;
        }
        let step = (b - a) / (SCAN_POINTS - 1) as f64;
        fine = (0..SCAN_POINTS)
            .map(|i| {
                let y = a + i as f64 * step;
                let v = log_f(y);
                (y, if v.is_nan() { f64::NEG_INFINITY } else { v })
            })
            .collect();
        peak = fine.iter().map(|&(_, v)| v).fold(peak, f64::max);
        let first = fine.iter().position(|&(_, v)| v > peak - LOG_CUTOFF).unwrap_or(0);
        let last = fine.iter().rposition(|&(_, v)| v > peak - LOG_CUTOFF).unwrap_or(fine.len() - 1);
        let (na, nb) = (fine[first.saturating_sub(1)].0, fine[(last + 1).min(fine.len() - 1)].0);
        a = na;
        b = nb;
        let stride = (last + 1 - first).div_ceil(MAX_SEGMENTS).max(1);
        cuts = Some(a)
            .into_iter()
            .chain(fine[first..=last].iter().step_by(stride).map(|&(y, _)| y).filter(|&y| y > a && y < b))
            .chain(Some(b))
            .collect();
    }
    if cuts.len() > MAX_SEGMENTS + 2 {
        let stride = cuts.len().div_ceil(MAX_SEGMENTS);
        let last = *cuts.last().unwrap();
        cuts = cuts.into_iter().step_by(stride).collect();
        if *cuts.last().unwrap() != last {
            cuts.push(last);
        }
    }
    let grid = fine;

    let g = |y: f64| (log_f(y) - peak).exp();
    // Trapezoid estimate on the scan grid sets the absolute target.
    let rough: f64 = grid
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * ((w[0].1 - peak).exp() + (w[1].1 - peak).exp()))
        .sum();
    let target = rel_tol * 0.05 * rough.max(1e-300) / cuts.len() as f64;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += adaptive(&g, w[0], w[1], target, 0)?;
    }
    if !(total > 0.0) {
        return Err(Error::Quadrature("integral vanished".into()));
    }
    Ok(total.ln() + peak)
}

fn adaptive(g: &impl Fn(f64) -> f64, a: f64, b: f64, target: f64, depth: u32) -> Result<f64> {
    let out = quadrature::integrate(g, a, b, target);
    if out.error_estimate <= target || out.error_estimate <= 1e-14 * out.integral.abs() {
        return Ok(out.integral);
    }
    if depth >= MAX_DEPTH {
        // Rounding in log_f limits the attainable accuracy for very peaked
        // integrands; accept errors at that noise floor.
        if out.error_estimate <= NOISE_FLOOR * out.integral.abs() {
            return Ok(out.integral);
        }
        return Err(Error::Quadrature(format!(
            "no convergence on [{a}, {b}]: error estimate {}",
            out.error_estimate
        )));
    }
    let mid = 0.5 * (a + b);
    Ok(adaptive(g, a, mid, 0.5 * target, depth + 1)? + adaptive(g, mid, b, 0.5 * target, depth + 1)?)
}

fn scan(log_f: &impl Fn(f64) -> f64, hi: f64) -> (Vec<(f64, f64)>, f64) {
    let grid: Vec<(f64, f64)> = (0..SCAN_POINTS)
        .map(|i| {
            let e = -SCAN_DECADES * (1.0 - i as f64 / (SCAN_POINTS - 1) as f64);
            let y = hi * 10f64.powf(e);
            let v = log_f(y);
            (y, if v.is_nan() { f64::NEG_INFINITY } else { v })
        })
        .collect();
    let peak = grid.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
    (grid, peak)
}
