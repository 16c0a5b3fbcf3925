//! Split-step Fourier integrator for the semiclassical focusing NLS
//! `iεψ_t + (ε²/2)ψ_xx + |ψ|²ψ = 0` on a periodic box `[-D, D)`.
//!
//! Each Strang step applies a half nonlinear phase rotation
//! `ψ → e^{i|ψ|² dt/(2ε)} ψ`, the exact linear propagator
//! `ψ̂_k → e^{-iεk² dt/2} ψ̂_k` in Fourier space, and a second half phase.
//! Both substeps are exact, so the discrete `L²` norm is preserved up to
//! rounding; drift beyond `1e-8` relative is reported as an instability.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::cli::Region;
use crate::error::{Error, Result};
use crate::scattering::BarrierParams;

type C = Complex64;

/// Relative norm drift treated as an instability.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

/// Solver settings. Construct with [`SolverConfig::new`] or [`SolverConfig::desk`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    params: BarrierParams,
    half_width: f64,
    grid_points: usize,
    dt: f64,
    t_final: f64,
    snapshot_times: Vec<f64>,
}

impl SolverConfig {
    /// Validated constructor.
    ///
    /// Requires `D ≥ L + 4q t_final`, `dx = 2D/N ≤ ε/(8q)`, `dt ≤ dx`, a
    /// power-of-two `N`, and sorted snapshot times in `[0, t_final]`.
    pub fn new(
        params: BarrierParams,
        half_width: f64,
        grid_points: usize,
        dt: f64,
        t_final: f64,
        snapshot_times: Vec<f64>,
    ) -> Result<Self> {
        let (q, l, eps) = (params.q(), params.l(), params.eps());
        if !(t_final.is_finite() && t_final >= 0.0) {
            return Err(Error::Input(format!("t_final must be finite and non-negative, got {t_final}")));
        }
        if !(half_width.is_finite() && half_width >= l + 4.0 * q * t_final) {
            return Err(Error::Input(format!(
                "half width D = {half_width} is below L + 4 q t_final = {}",
                l + 4.0 * q * t_final
            )));
        }
        if grid_points < 2 || !grid_points.is_power_of_two() {
            return Err(Error::Input(format!("grid_points must be a power of two >= 2, got {grid_points}")));
        }
        let dx = 2.0 * half_width / grid_points as f64;
        if dx > eps / (8.0 * q) {
            return Err(Error::Input(format!("grid spacing {dx} does not resolve eps: need dx <= {}", eps / (8.0 * q))));
        }
        if !(dt > 0.0 && dt <= dx) {
            return Err(Error::Input(format!("time step must satisfy 0 < dt <= dx = {dx}, got {dt}")));
        }
        if snapshot_times.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::Input("snapshot times must be sorted".into()));
        }
        if snapshot_times.iter().any(|&s| !(s >= 0.0 && s <= t_final)) {
            return Err(Error::Input(format!("snapshot times must lie in [0, {t_final}]")));
        }
        Ok(Self { params, half_width, grid_points, dt, t_final, snapshot_times })
    }

    /// Desk-scale defaults: `D = 4`, `N = 2¹⁴`, `dt = dx/4`.
    pub fn desk(params: BarrierParams, t_final: f64, snapshot_times: Vec<f64>) -> Result<Self> {
        let (d, n) = (4.0, 1 << 14);
        let dx = 2.0 * d / n as f64;
        Self::new(params, d, n, dx / 4.0, t_final, snapshot_times)
    }

    pub fn params(&self) -> &BarrierParams {
        &self.params
    }
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn grid_points(&self) -> usize {
        self.grid_points
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn t_final(&self) -> f64 {
        self.t_final
    }
    pub fn snapshot_times(&self) -> &[f64] {
        &self.snapshot_times
    }
    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.grid_points as f64
    }

    /// Grid nodes `x_j = -D + j dx`.
    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.grid_points).map(|j| -self.half_width + j as f64 * dx).collect()
    }
}

/// Samples of a field on a grid at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub x_nodes: Vec<f64>,
    pub values: Vec<C>,
    pub t: f64,
    pub region_labels: Option<Vec<Region>>,
}

impl GridField {
    /// Validated constructor: congruent arrays and finite values.
    pub fn new(x_nodes: Vec<f64>, values: Vec<C>, t: f64, region_labels: Option<Vec<Region>>) -> Result<Self> {
        if x_nodes.len() != values.len() || region_labels.as_ref().is_some_and(|r| r.len() != x_nodes.len()) {
            return Err(Error::Input("grid field arrays must have equal length".into()));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Input("grid field values must be finite".into()));
        }
        Ok(Self { x_nodes, values, t, region_labels })
    }

    /// Discrete `L²` norm `(Σ |ψ_j|² dx)^{1/2}` for a uniform grid.
    pub fn l2_norm(&self) -> f64 {
        let dx = if self.x_nodes.len() > 1 { self.x_nodes[1] - self.x_nodes[0] } else { 1.0 };
        discrete_norm(&self.values, dx)
    }
}

fn discrete_norm(values: &[C], dx: f64) -> f64 {
    (values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx).sqrt()
}

/// Square barrier sampled on the grid, with the midpoint value `q/2` at `x = ±L`.
pub fn barrier_initial_data(cfg: &SolverConfig) -> Vec<C> {
    let (q, l) = (cfg.params.q(), cfg.params.l());
    let tol = 1e-12 * cfg.half_width;
    cfg.nodes()
        .into_iter()
        .map(|x| {
            let d = x.abs() - l;
            if d.abs() <= tol {
                C::new(0.5 * q, 0.0)
            } else if d < 0.0 {
                C::new(q, 0.0)
            } else {
                C::new(0.0, 0.0)
            }
        })
        .collect()
}

/// Outcome of a run: the snapshots that were reached and the failure, if any.
#[derive(Debug)]
pub struct Run {
    pub snapshots: Vec<GridField>,
    pub failure: Option<Error>,
}

/// Evolves the square barrier and returns the snapshots, plus one at `t_final`
/// when it is not already requested.
pub fn evolve(cfg: &SolverConfig) -> Result<Vec<GridField>> {
    into_result(evolve_run(cfg, barrier_initial_data(cfg)))
}

/// Evolves arbitrary initial samples on the configured grid.
pub fn evolve_from(cfg: &SolverConfig, initial: Vec<C>) -> Result<Vec<GridField>> {
    into_result(evolve_run(cfg, initial))
}

fn into_result(run: Run) -> Result<Vec<GridField>> {
    match run.failure {
        Some(e) => Err(e),
        None => Ok(run.snapshots),
    }
}

struct Stepper {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    k2: Vec<f64>,
    scratch: Vec<C>,
    eps: f64,
}

impl Stepper {
    fn new(cfg: &SolverConfig) -> Self {
        let n = cfg.grid_points;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let dk = PI / cfg.half_width;
        let k2 = (0..n)
            .map(|j| {
                let k = if j < n / 2 { j as f64 } else { j as f64 - n as f64 } * dk;
                k * k
            })
            .collect();
        let scratch = vec![C::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
        Self { fwd, inv, k2, scratch, eps: cfg.params.eps() }
    }

    fn half_nonlinear(&self, psi: &mut [C], h: f64) {
        let c = 0.5 * h / self.eps;
        for v in psi.iter_mut() {
            *v *= C::from_polar(1.0, c * v.norm_sqr());
        }
    }

    fn step(&mut self, psi: &mut [C], h: f64) {
        self.half_nonlinear(psi, h);
        self.fwd.process_with_scratch(psi, &mut self.scratch);
        let n = psi.len() as f64;
        let c = -0.5 * self.eps * h;
        for (v, &k2) in psi.iter_mut().zip(&self.k2) {
            *v *= C::from_polar(1.0 / n, c * k2);
        }
        self.inv.process_with_scratch(psi, &mut self.scratch);
        self.half_nonlinear(psi, h);
    }
}

/// Runs the integrator, keeping every snapshot reached before a failure.
pub fn evolve_run(cfg: &SolverConfig, initial: Vec<C>) -> Run {
    let nodes = cfg.nodes();
    let mut snapshots = Vec::new();
    if initial.len() != cfg.grid_points {
        let failure = Error::Input(format!("initial data has {} samples, grid has {}", initial.len(), cfg.grid_points));
        return Run { snapshots, failure: Some(failure) };
    }
    let dx = cfg.dx();
    let mut psi = initial;
    let norm0 = discrete_norm(&psi, dx);
    if !norm0.is_finite() {
        return Run { snapshots, failure: Some(Error::Instability { t: 0.0, reason: "non-finite initial data".into() }) };
    }
    let mut targets = cfg.snapshot_times.clone();
    if targets.last().is_none_or(|&s| s < cfg.t_final) {
        targets.push(cfg.t_final);
    }
    let mut stepper = Stepper::new(cfg);
    let mut t = 0.0;
    for &target in &targets {
        let span = target - t;
        if span > 0.0 {
            // Equal steps no longer than dt landing exactly on the target.
            let n_steps = (span / cfg.dt - 1e-9).ceil().max(1.0) as usize;
            let h = span / n_steps as f64;
            for i in 0..n_steps {
                stepper.step(&mut psi, h);
                let now = t + (i + 1) as f64 * h;
                let norm = discrete_norm(&psi, dx);
                if !norm.is_finite() {
                    let failure = Error::Instability { t: now, reason: "non-finite values in the field".into() };
                    return Run { snapshots, failure: Some(failure) };
                }
                let drift = (norm - norm0).abs() / norm0.max(f64::MIN_POSITIVE);
                if norm0 > 0.0 && drift > NORM_DRIFT_LIMIT {
                    let failure = Error::Instability { t: now, reason: format!("relative norm drift {drift:e}") };
                    return Run { snapshots, failure: Some(failure) };
                }
            }
            t = target;
        }
        snapshots.push(GridField { x_nodes: nodes.clone(), values: psi.clone(), t: target, region_labels: None });
    }
    Run { snapshots, failure: None }
}

/// Maximum and root-mean-square of `|ψ_num - ψ_asy|` over nodes in `patch`.
pub fn compare_fields(numeric: &GridField, asymptotic: &GridField, patch: (f64, f64)) -> Result<(f64, f64)> {
    if numeric.x_nodes != asymptotic.x_nodes || numeric.values.len() != asymptotic.values.len() {
        return Err(Error::Input("fields must share their x nodes".into()));
    }
    if numeric.t != asymptotic.t {
        return Err(Error::Input(format!("fields are at different times {} and {}", numeric.t, asymptotic.t)));
    }
    let (lo, hi) = patch;
    let (first, last) = match (numeric.x_nodes.first(), numeric.x_nodes.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::Input("fields are empty".into())),
    };
    if !(lo <= hi && lo >= first && hi <= last) {
        return Err(Error::Input(format!("patch [{lo}, {hi}] is not inside the grid [{first}, {last}]")));
    }
    let mut linf = 0.0_f64;
    let mut sum = 0.0;
    let mut count = 0usize;
    for ((&x, a), b) in numeric.x_nodes.iter().zip(&numeric.values).zip(&asymptotic.values) {
        if x >= lo && x <= hi {
            let d = (a - b).norm();
            linf = linf.max(d);
            sum += d * d;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Input(format!("patch [{lo}, {hi}] contains no grid nodes")));
    }
    Ok((linf, (sum / count as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(eps: f64, t_final: f64, snaps: Vec<f64>) -> SolverConfig {
        let p = BarrierParams::new(1.0, 1.0, eps).unwrap();
        let n = 1 << 11;
        let d = 4.0;
        SolverConfig::new(p, d, n, 2.0 * d / n as f64, t_final, snaps).unwrap()
    }

    #[test]
    fn config_validation() {
        let p = BarrierParams::new(1.0, 1.0, 0.1).unwrap();
        assert!(SolverConfig::new(p, 1.5, 1 << 12, 1e-4, 0.2, vec![]).is_err());
        assert!(SolverConfig::new(p, 4.0, 1000, 1e-4, 0.2, vec![]).is_err());
        assert!(SolverConfig::new(p, 4.0, 256, 1e-4, 0.2, vec![]).is_err());
        assert!(SolverConfig::new(p, 4.0, 1 << 12, 1e-2, 0.2, vec![]).is_err());
        assert!(SolverConfig::new(p, 4.0, 1 << 12, 1e-4, 0.2, vec![0.1, 0.05]).is_err());
        assert!(SolverConfig::new(p, 4.0, 1 << 12, 1e-4, 0.2, vec![0.3]).is_err());
        assert!(SolverConfig::desk(p, 0.2, vec![0.1]).is_ok());
    }

    #[test]
    fn plane_wave_is_exact() {
        let cfg = small_cfg(0.1, 0.1, vec![0.05]);
        let snaps = evolve_from(&cfg, vec![C::new(1.0, 0.0); cfg.grid_points()]).unwrap();
        assert_eq!(snaps.len(), 2);
        for s in &snaps {
            let exact = C::from_polar(1.0, s.t / 0.1);
            let err = s.values.iter().map(|v| (v - exact).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "t = {}: {err:e}", s.t);
        }
        assert_eq!(snaps[0].t, 0.05);
        assert_eq!(snaps[1].t, 0.1);
    }

    #[test]
    fn zero_stays_zero() {
        let cfg = small_cfg(0.1, 0.05, vec![]);
        let snaps = evolve_from(&cfg, vec![C::new(0.0, 0.0); cfg.grid_points()]).unwrap();
        assert!(snaps[0].values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn barrier_norm_and_parity() {
        let cfg = small_cfg(0.1, 0.1, vec![]);
        let init = barrier_initial_data(&cfg);
        let n0 = discrete_norm(&init, cfg.dx());
        // Midpoint samples at ±L give Σ|ψ|² dx = 2L - dx/2.
        assert!((n0 - (2.0 - 0.5 * cfg.dx()).sqrt()).abs() < 1e-12);
        let snap = &evolve(&cfg).unwrap()[0];
        assert!(((snap.l2_norm() - n0) / n0).abs() < 1e-10);
        // Node j mirrors to N - j on the periodic grid.
        let n = cfg.grid_points();
        let par = (1..n).map(|j| (snap.values[j] - snap.values[n - j]).norm()).fold(0.0, f64::max);
        assert!(par < 1e-10, "{par:e}");
    }

    #[test]
    fn gaussian_strang_order() {
        let p = BarrierParams::new(1.0, 1.0, 1.0).unwrap();
        let (d, n) = (8.0, 256);
        let dx = 2.0 * d / n as f64;
        let run = |dt: f64| {
            let cfg = SolverConfig::new(p, d, n, dt, 0.5, vec![]).unwrap();
            let init = cfg.nodes().iter().map(|&x| C::new((-x * x).exp(), 0.0)).collect();
            evolve_from(&cfg, init).unwrap().pop().unwrap().values
        };
        let (a, b, c) = (run(dx), run(dx / 2.0), run(dx / 4.0));
        let diff = |u: &[C], v: &[C]| u.iter().zip(v).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let order = (diff(&a, &b) / diff(&b, &c)).log2();
        assert!((1.7..=2.3).contains(&order), "order {order}");
    }

    #[test]
    fn compare_identical_and_mismatched() {
        let cfg = small_cfg(0.1, 0.0, vec![]);
        let f = GridField::new(cfg.nodes(), barrier_initial_data(&cfg), 0.0, None).unwrap();
        assert_eq!(compare_fields(&f, &f, (-1.0, 1.0)).unwrap(), (0.0, 0.0));
        let mut g = f.clone();
        g.x_nodes.pop();
        g.values.pop();
        assert!(compare_fields(&f, &g, (-1.0, 1.0)).is_err());
        assert!(compare_fields(&f, &f, (-10.0, 1.0)).is_err());
    }
}
