//! Time series of the mixing functionals along a trajectory, and the calibrated
//! growth envelopes for `V` and `sqrt(W)`.

use crate::advection::{self_similar_trajectory, FrozenBase, SelfSimilarSchedule, Snapshot, Trajectory};
use crate::dcommutator::{derivative_check_at, fourier_pairing, trilinear_fourier, Derivative};
use crate::error::{MixError, Result};
use crate::field::{lp_norm, sobolev_w1p_seminorm, ScalarField};
use crate::functionals::{active_l2_squared, hs_norm, log_derivative, v_functional, w_functional};
use crate::io::{Series, SeriesRow};
use crate::mixing::{dual_exponent, geometric_mixing_scale};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsOptions {
    /// Extra Sobolev indices `s` for `||theta||_{H^s}` columns (`-1` is always recorded).
    pub hs: Vec<f64>,
    /// Accuracy parameter of the geometric mixing scale; `None` skips it.
    pub kappa: Option<f64>,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        DiagnosticsOptions { hs: Vec::new(), kappa: Some(0.5) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2: f64,
    pub v: f64,
    pub w: f64,
    pub hminus1: f64,
    /// `(s, ||theta||_{H^s})` for each requested index.
    pub hs: Vec<(f64, f64)>,
    /// `NaN` when not requested, `+inf` for the sentinel.
    pub eps_geom: f64,
    pub cum_grad_p: f64,
    pub dvdt_gap: Option<f64>,
}

pub fn hs_column(s: f64) -> String {
    format!("h_s={s}")
}

pub fn record(field: &ScalarField, t: f64, cum_grad_p: f64, opts: &DiagnosticsOptions) -> Result<DiagnosticsRecord> {
    let eps_geom = match opts.kappa {
        Some(k) if field.max_abs() > 0.0 => geometric_mixing_scale(field, k)?.epsilon,
        Some(_) => f64::INFINITY,
        None => f64::NAN,
    };
    Ok(DiagnosticsRecord {
        t,
        l2: field.l2_norm(),
        v: v_functional(field),
        w: w_functional(field),
        hminus1: hs_norm(field, -1.0),
        hs: opts.hs.iter().map(|&s| (s, hs_norm(field, s))).collect(),
        eps_geom,
        cum_grad_p,
        dvdt_gap: None,
    })
}

pub fn snapshot_record(snap: &Snapshot, opts: &DiagnosticsOptions) -> Result<DiagnosticsRecord> {
    record(&snap.field, snap.t, snap.cum_grad_p, opts)
}

pub fn trajectory_records(traj: &Trajectory, opts: &DiagnosticsOptions) -> Result<Vec<DiagnosticsRecord>> {
    traj.snapshots().iter().map(|s| snapshot_record(s, opts)).collect()
}

/// Fill `dvdt_gap` from a centred-difference check at every sample whose
/// bracket `[t - dt, t + dt]` stays inside one flow segment; other samples get `NaN`.
pub fn attach_dvdt_gaps(records: &mut [DiagnosticsRecord], traj: &Trajectory, dt: f64) -> Result<()> {
    for (rec, snap) in records.iter_mut().zip(traj.snapshots()) {
        rec.dvdt_gap = Some(match derivative_check_at(Derivative::V, &snap.field, &traj.flow, snap.t, dt) {
            Ok(c) => c.gap,
            Err(MixError::InvalidArgument(_)) => f64::NAN,
            Err(e) => return Err(e),
        });
    }
    Ok(())
}

/// Flatten records into `series.csv` rows; `h_s=<s>` and `dvdt_gap` become
/// trailing columns.
pub fn to_series(records: &[DiagnosticsRecord]) -> Series {
    let mut extra: Vec<String> = records.first().map(|r| r.hs.iter().map(|(s, _)| hs_column(*s)).collect()).unwrap_or_default();
    let gaps = records.iter().any(|r| r.dvdt_gap.is_some());
    if gaps {
        extra.push("dvdt_gap".into());
    }
    let rows = records
        .iter()
        .map(|r| {
            let mut extra: Vec<f64> = r.hs.iter().map(|(_, v)| *v).collect();
            if gaps {
                extra.push(r.dvdt_gap.unwrap_or(f64::NAN));
            }
            SeriesRow { base: [r.t, r.l2, r.v, r.w, r.hminus1, r.eps_geom, r.cum_grad_p], extra }
        })
        .collect();
    Series { extra, rows }
}

/// Least-squares slope of `ys` against `xs`; `None` with fewer than two points.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs[..n].iter().zip(&ys[..n]).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    V,
    SqrtW,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    pub t: f64,
    /// Time derivative of the monitored functional.
    pub derivative: f64,
    pub grad_norm: f64,
    pub ratio: f64,
}

/// Empirical constant of a growth bound: the supremum over the run's samples of
/// `|d/dt F| / (norm factor * ||grad u||_p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub functional: Functional,
    pub p: f64,
    pub c: f64,
    /// Time at which the supremum is attained.
    pub t_max: f64,
    /// Product of the conserved norms of `theta_0` in the bound.
    pub norm_factor: f64,
    pub samples: Vec<CalibrationSample>,
    pub provenance: String,
}

/// `||theta_0||_inf ||theta_0||_{p'}`, the factor in the linear bound on `V`.
pub fn v_norm_factor(theta0: &ScalarField, p: f64) -> Result<f64> {
    Ok(theta0.max_abs() * lp_norm(theta0, dual_exponent(p))?)
}

/// `||theta_0||_{q~}` with `1/q + 1/q~ = 1/2`, the factor in the bound on `sqrt(W)`.
pub fn w_norm_factor(theta0: &ScalarField, q: f64) -> Result<f64> {
    if q < 2.0 {
        return Err(MixError::InvalidArgument("the W bound needs q >= 2".into()));
    }
    let qt = if q == 2.0 { f64::INFINITY } else { 2.0 * q / (q - 2.0) };
    lp_norm(theta0, qt)
}

/// `W` values below this are treated as zero when dividing by `sqrt(W)`.
const W_FLOOR: f64 = 1e-24;

/// Calibrate the growth constant of `functional` from the trajectory's own
/// derivatives, evaluated with the Fourier-side trilinear form.
pub fn calibrate(traj: &Trajectory, functional: Functional) -> Result<Calibration> {
    let p = traj.grad_p;
    let theta0 = &traj.snapshots()[0].field;
    let norm_factor = match functional {
        Functional::V => v_norm_factor(theta0, p)?,
        Functional::SqrtW => w_norm_factor(theta0, p)?,
    };
    let grid = *traj.grid();
    let mut samples = Vec::with_capacity(traj.snapshots().len());
    for snap in traj.snapshots() {
        let u = traj.flow.velocity(&grid, snap.t)?;
        let grad_norm = sobolev_w1p_seminorm(&u, p)?;
        let theta = &snap.field;
        let derivative = match functional {
            Functional::V => trilinear_fourier(theta, theta, &u)?,
            Functional::SqrtW => {
                let w = w_functional(theta);
                if w < W_FLOOR {
                    continue;
                }
                fourier_pairing(&log_derivative(theta), theta, &u)? / (2.0 * w.sqrt())
            }
        };
        let denom = norm_factor * grad_norm;
        let ratio = if derivative == 0.0 { 0.0 } else { derivative.abs() / denom };
        samples.push(CalibrationSample { t: snap.t, derivative, grad_norm, ratio });
    }
    let (t_max, c) = samples.iter().fold((f64::NAN, 0.0), |(tm, c), s| if s.ratio > c { (s.t, s.ratio) } else { (tm, c) });
    let provenance = format!(
        "calibrated: sup over {} samples of |d/dt {}| / (norm factor * ||grad u||_{p}) on this run",
        samples.len(),
        match functional {
            Functional::V => "V",
            Functional::SqrtW => "sqrt(W)",
        }
    );
    Ok(Calibration { functional, p, c, t_max, norm_factor, samples, provenance })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub t: f64,
    /// `|F(t) - F(0)|`.
    pub change: f64,
    /// `C * norm factor * int ||grad u||_p`.
    pub allowance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub functional: Functional,
    pub c: f64,
    pub points: Vec<EnvelopePoint>,
    /// Largest `change - allowance`.
    pub worst_excess: f64,
    pub holds: bool,
}

/// Check `|F(t) - F(0)| <= C * norm factor * int_0^t ||grad u||_p` at every
/// sample, with `C` from `cal`.
pub fn check_envelope(traj: &Trajectory, cal: &Calibration) -> EnvelopeReport {
    let value = |f: &ScalarField| match cal.functional {
        Functional::V => v_functional(f),
        Functional::SqrtW => w_functional(f).sqrt(),
    };
    let f0 = value(&traj.snapshots()[0].field);
    let points: Vec<EnvelopePoint> = traj
        .snapshots()
        .iter()
        .map(|s| EnvelopePoint {
            t: s.t,
            change: (value(&s.field) - f0).abs(),
            allowance: cal.c * cal.norm_factor * s.cum_grad_p,
        })
        .collect();
    let worst_excess = points.iter().map(|p| p.change - p.allowance).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * points.iter().map(|p| p.allowance).fold(1.0, f64::max);
    EnvelopeReport { functional: cal.functional, c: cal.c, holds: worst_excess <= tol, worst_excess, points }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub m: u64,
    /// `(n, V(theta(n)))`.
    pub rows: Vec<(u32, f64)>,
    /// Least-squares slope of `V` against `n`; `None` for a single point.
    pub slope: Option<f64>,
    /// `log(m) ||theta_0 - mean||^2`.
    pub predicted: f64,
    pub relative_error: Option<f64>,
    pub notice: Option<String>,
}

/// `V` along the self-similar trajectory with frozen base `theta0` at integer
/// times `0..=n_max`, and the fitted growth rate.
pub fn sharpness(theta0: &ScalarField, m: u64, n_max: u32) -> Result<SharpnessReport> {
    let schedule = SelfSimilarSchedule::new(m, FrozenBase(theta0.clone()))?;
    let rows = (0..=n_max)
        .map(|n| Ok((n, v_functional(&self_similar_trajectory(&schedule, n as f64)?))))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let slope = least_squares_slope(&xs, &ys);
    let predicted = (m as f64).ln() * active_l2_squared(theta0);
    Ok(SharpnessReport {
        m,
        rows,
        slope,
        predicted,
        relative_error: slope.map(|s| (s - predicted).abs() / predicted.abs()),
        notice: slope.is_none().then(|| "single point: no slope fitted".to_string()),
    })
}
