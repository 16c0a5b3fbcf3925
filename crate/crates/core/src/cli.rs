//! Region classification, dispatch between the asymptotic wave forms, grid
//! sampling, validation runs against the direct solver, the flat
//! `key = value` configuration format, and CSV formatting.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::RwLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::genus0::psi_asy_g0;
use crate::genus1::{modulation_constants, psi_asy_g1, solve_endpoint_with};
use crate::nls_direct::{compare_fields, evolve, GridField, SolverConfig};
use crate::phase_geometry::{first_breaking_time, second_breaking_time};
use crate::scattering::BarrierParams;
use crate::specfun::QuadratureSpec;

type C = Complex64;

/// Label of a space-time point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    /// Exterior `|x| > L`, where `ψ → 0`.
    S0,
    /// Plane-wave region `|x| < L`, `0 ≤ t < T₁(x)`.
    S1,
    /// Genus-one region `|x| < L`, `T₁(x) < t < T₂(x)`.
    S2,
    /// Boundaries, points beyond `T₂`, and points where `T₂` is unavailable.
    BeyondScope,
}

impl RegionLabel {
    /// Token used in CSV output.
    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::S0 => "S0",
            RegionLabel::S1 => "S1",
            RegionLabel::S2 => "S2",
            RegionLabel::BeyondScope => "NA",
        }
    }
}

/// Region of a point together with the breaking times that decided it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub label: RegionLabel,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
}

/// Default tolerance of the second-breaking search.
pub const T2_TOL: f64 = 1e-10;

/// Classifier with a per-`x` cache of `T₂`, keyed on `|x|` rounded to 12 decimals.
#[derive(Debug)]
pub struct Classifier {
    params: BarrierParams,
    t2_tol: f64,
    cache: RwLock<HashMap<i64, Option<f64>>>,
}

impl Classifier {
    pub fn new(params: BarrierParams) -> Self {
        Self::with_tol(params, T2_TOL)
    }

    pub fn with_tol(params: BarrierParams, t2_tol: f64) -> Self {
        Self { params, t2_tol, cache: RwLock::new(HashMap::new()) }
    }

    pub fn params(&self) -> &BarrierParams {
        &self.params
    }

    /// `T₂(x)`, or `None` when the search fails.
    pub fn t2(&self, x: f64) -> Option<f64> {
        let key = (x.abs() * 1e12).round() as i64;
        if let Some(v) = self.cache.read().ok().and_then(|c| c.get(&key).copied()) {
            return v;
        }
        let v = second_breaking_time(key as f64 * 1e-12, &self.params, self.t2_tol).ok();
        if let Ok(mut c) = self.cache.write() {
            c.insert(key, v);
        }
        v
    }

    /// Region of `(x, t)`; negative `t` is reported as beyond scope.
    pub fn classify(&self, x: f64, t: f64) -> Region {
        let l = self.params.l();
        let na = |t1, t2| Region { label: RegionLabel::BeyondScope, t1, t2 };
        if !(t >= 0.0 && x.is_finite() && t.is_finite()) {
            return na(None, None);
        }
        if x.abs() > l {
            return Region { label: RegionLabel::S0, t1: None, t2: None };
        }
        if x.abs() == l {
            return na(None, None);
        }
        let t1 = match first_breaking_time(x, &self.params) {
            Ok(v) => v,
            Err(_) => return na(None, None),
        };
        if t < t1 {
            return Region { label: RegionLabel::S1, t1: Some(t1), t2: None };
        }
        if t == t1 {
            return na(Some(t1), None);
        }
        let t2 = self.t2(x);
        match t2 {
            Some(t2) if t < t2 => Region { label: RegionLabel::S2, t1: Some(t1), t2: Some(t2) },
            _ => na(Some(t1), t2),
        }
    }
}

/// One-shot classification without a shared cache.
pub fn classify(x: f64, t: f64, p: &BarrierParams) -> Region {
    Classifier::new(*p).classify(x, t)
}

/// Leading-order `ψ_asy` for a classified point; `None` beyond scope.
pub fn psi_asymptotic(x: f64, t: f64, p: &BarrierParams, region: &Region, quad: &QuadratureSpec) -> Result<Option<C>> {
    match region.label {
        RegionLabel::S0 => Ok(Some(C::new(0.0, 0.0))),
        RegionLabel::S1 => psi_asy_g0(x, t, p).map(Some),
        RegionLabel::S2 => {
            // The solution is even in x.
            let xa = x.abs();
            let mu = (p.l() - xa) / (2.0 * t);
            let state = solve_endpoint_with(mu, p.q(), quad)?;
            let mods = modulation_constants(state.alpha, xa, t, p, quad)?;
            psi_asy_g1(xa, t, p, &state, &mods).map(Some)
        }
        RegionLabel::BeyondScope => Ok(None),
    }
}

/// Sampling mode of [`sample_grid`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Asymptotic,
    Numeric,
    Both,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asymptotic" => Ok(Mode::Asymptotic),
            "numeric" => Ok(Mode::Numeric),
            "both" => Ok(Mode::Both),
            _ => Err(Error::Config(format!("unknown mode '{s}' (asymptotic, numeric, both)"))),
        }
    }
}

/// Solver settings that override the desk-scale defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolverOverrides {
    pub half_width: Option<f64>,
    pub grid_points: Option<usize>,
    pub dt: Option<f64>,
}

impl SolverOverrides {
    /// Builds a solver configuration, filling unset fields with the desk defaults.
    pub fn build(&self, params: BarrierParams, t_final: f64, snapshots: Vec<f64>) -> Result<SolverConfig> {
        let d = self.half_width.unwrap_or(4.0);
        let n = self.grid_points.unwrap_or(1 << 14);
        let dt = self.dt.unwrap_or(2.0 * d / n as f64 / 4.0);
        SolverConfig::new(params, d, n, dt, t_final, snapshots)
    }
}

/// One sampled point.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePoint {
    pub x: f64,
    pub t: f64,
    pub region: Region,
    pub asymptotic: Option<C>,
    pub numeric: Option<C>,
}

/// Per-row, per-region comparison between solver and asymptotics.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchError {
    pub t: f64,
    pub region: RegionLabel,
    pub patch_lo: f64,
    pub patch_hi: f64,
    pub linf: f64,
    pub l2: f64,
}

/// A point whose evaluation failed, recorded without aborting the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PointFailure {
    pub x: f64,
    pub t: f64,
    pub message: String,
}

/// Result of [`sample_grid`]: points ordered by `t` then `x`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleReport {
    pub points: Vec<SamplePoint>,
    pub failures: Vec<PointFailure>,
    pub comparisons: Vec<PatchError>,
}

/// Grid specification of [`sample_grid`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub t_range: (f64, f64),
    pub nx: usize,
    pub nt: usize,
}

impl GridSpec {
    fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
        let (a, b) = range;
        (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
    }
    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.x_range, self.nx)
    }
    pub fn ts(&self) -> Vec<f64> {
        Self::axis(self.t_range, self.nt)
    }
    fn validate(&self) -> Result<()> {
        let finite = [self.x_range.0, self.x_range.1, self.t_range.0, self.t_range.1].iter().all(|v| v.is_finite());
        if !finite || self.x_range.0 > self.x_range.1 || self.t_range.0 > self.t_range.1 {
            return Err(Error::Input("grid ranges must be finite and ordered".into()));
        }
        if self.nx < 2 || self.nt < 2 {
            return Err(Error::Input("grid resolution must be at least 2 per axis".into()));
        }
        if self.t_range.0 < 0.0 {
            return Err(Error::Input("t range must be non-negative".into()));
        }
        Ok(())
    }
}

/// Band-limited interpolation of a periodic solver snapshot at `x`.
fn trig_interpolate(spectrum: &[C], half_width: f64, x: f64) -> C {
    let n = spectrum.len();
    let dk = std::f64::consts::PI / half_width;
    let shift = x + half_width;
    let mut acc = C::new(0.0, 0.0);
    for (j, &c) in spectrum.iter().enumerate() {
        let kj = if j < n / 2 {
            j as f64
        } else if j == n / 2 {
            // Split the Nyquist mode symmetrically.
            acc += c * (dk * j as f64 * shift).cos();
            continue;
        } else {
            j as f64 - n as f64
        };
        acc += c * C::from_polar(1.0, kj * dk * shift);
    }
    acc / n as f64
}

fn solver_values(cfg: &SolverConfig, ts: &[f64], xs: &[f64]) -> Result<Vec<Vec<C>>> {
    let snaps = evolve(cfg)?;
    let mut planner = rustfft::FftPlanner::new();
    let fft = planner.plan_fft_forward(cfg.grid_points());
    let rows = ts
        .iter()
        .map(|&t| {
            let snap = snaps
                .iter()
                .find(|s| s.t == t)
                .ok_or_else(|| Error::Consistency(format!("solver produced no snapshot at t = {t}")))?;
            let mut spec = snap.values.clone();
            fft.process(&mut spec);
            Ok(xs.par_iter().map(|&x| trig_interpolate(&spec, cfg.half_width(), x)).collect())
        })
        .collect::<Result<Vec<Vec<C>>>>()?;
    Ok(rows)
}

/// Evaluates the grid. Rows are computed in parallel; the output order is fixed.
pub fn sample_grid(
    grid: &GridSpec,
    p: &BarrierParams,
    mode: Mode,
    solver: &SolverOverrides,
    quad: &QuadratureSpec,
    classifier: &Classifier,
) -> Result<SampleReport> {
    grid.validate()?;
    let (xs, ts) = (grid.xs(), grid.ts());
    let want_asy = mode != Mode::Numeric;
    let cells: Vec<(SamplePoint, Option<PointFailure>)> = ts
        .par_iter()
        .flat_map_iter(|&t| xs.iter().map(move |&x| (x, t)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(x, t)| {
            let region = classifier.classify(x, t);
            let (asymptotic, failure) = if want_asy {
                match psi_asymptotic(x, t, p, &region, quad) {
                    Ok(v) => (v, None),
                    Err(e) => (None, Some(PointFailure { x, t, message: e.to_string() })),
                }
            } else {
                (None, None)
            };
            (SamplePoint { x, t, region, asymptotic, numeric: None }, failure)
        })
        .collect();
    let mut report = SampleReport::default();
    for (pt, f) in cells {
        report.points.push(pt);
        report.failures.extend(f);
    }
    if mode == Mode::Asymptotic {
        return Ok(report);
    }
    let cfg = solver.build(*p, grid.t_range.1, ts.clone())?;
    let rows = solver_values(&cfg, &ts, &xs)?;
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            report.points[i * xs.len() + j].numeric = Some(*v);
        }
    }
    if mode == Mode::Both {
        for (i, &t) in ts.iter().enumerate() {
            let row = &report.points[i * xs.len()..(i + 1) * xs.len()];
            report.comparisons.extend(row_patches(row, t)?);
        }
    }
    Ok(report)
}

/// Maximal runs of equal labels (excluding beyond-scope) with available values.
fn row_patches(row: &[SamplePoint], t: f64) -> Result<Vec<PatchError>> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < row.len() {
        let label = row[start].region.label;
        let mut end = start;
        while end + 1 < row.len() && row[end + 1].region.label == label {
            end += 1;
        }
        let run = &row[start..=end];
        if label != RegionLabel::BeyondScope && run.iter().all(|p| p.asymptotic.is_some() && p.numeric.is_some()) {
            let xs: Vec<f64> = run.iter().map(|p| p.x).collect();
            let num = GridField::new(xs.clone(), run.iter().map(|p| p.numeric.unwrap()).collect(), t, None)?;
            let asy = GridField::new(xs.clone(), run.iter().map(|p| p.asymptotic.unwrap()).collect(), t, None)?;
            let (linf, l2) = compare_fields(&num, &asy, (xs[0], xs[xs.len() - 1]))?;
            out.push(PatchError { t, region: label, patch_lo: xs[0], patch_hi: xs[xs.len() - 1], linf, l2 });
        }
        start = end + 1;
    }
    Ok(out)
}

/// A validation patch: a time, the region it is expected to lie in, and an `x` interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatchSpec {
    pub t: f64,
    pub region: RegionLabel,
    pub x_lo: f64,
    pub x_hi: f64,
}

/// One line of a validation run.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationRecord {
    pub eps: f64,
    pub region: RegionLabel,
    pub patch_lo: f64,
    pub patch_hi: f64,
    pub linf: f64,
    pub l2: f64,
}

/// Runs the solver once per `ε` and compares it with `ψ_asy` on each patch,
/// using every solver node inside the patch. Each patch must lie entirely in
/// its declared region, which must be `S0` or `S1`.
pub fn validation_run(
    base: &BarrierParams,
    eps_list: &[f64],
    patches: &[PatchSpec],
    solver: &SolverOverrides,
    quad: &QuadratureSpec,
) -> Result<Vec<ValidationRecord>> {
    let mut times: Vec<f64> = patches.iter().map(|p| p.t).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let t_final = *times.last().ok_or_else(|| Error::Input("no validation patches".into()))?;
    let mut out = Vec::new();
    for &eps in eps_list {
        let p = base.with_eps(eps)?;
        let cfg = solver.build(p, t_final, times.clone())?;
        let snaps = evolve(&cfg)?;
        for patch in patches {
            if !matches!(patch.region, RegionLabel::S0 | RegionLabel::S1) {
                return Err(Error::Input("pointwise validation is only defined in S0 and S1".into()));
            }
            let snap = snaps
                .iter()
                .find(|s| s.t == patch.t)
                .ok_or_else(|| Error::Consistency(format!("no snapshot at t = {}", patch.t)))?;
            let asy = snap
                .x_nodes
                .par_iter()
                .map(|&x| {
                    if x < patch.x_lo || x > patch.x_hi {
                        return Ok(C::new(0.0, 0.0));
                    }
                    let region = Region { label: classify(x, patch.t, &p).label, t1: None, t2: None };
                    if region.label != patch.region {
                        return Err(Error::Region(format!("({x}, {}) is not in {}", patch.t, patch.region.as_str())));
                    }
                    psi_asymptotic(x, patch.t, &p, &region, quad)?
                        .ok_or_else(|| Error::Region(format!("no asymptotic value at ({x}, {})", patch.t)))
                })
                .collect::<Result<Vec<C>>>()?;
            let asy = GridField::new(snap.x_nodes.clone(), asy, patch.t, None)?;
            let (linf, l2) = compare_fields(snap, &asy, (patch.x_lo, patch.x_hi))?;
            out.push(ValidationRecord { eps, region: patch.region, patch_lo: patch.x_lo, patch_hi: patch.x_hi, linf, l2 });
        }
    }
    Ok(out)
}

/// Interior turning points of `series` with a swing of at least `delta` on
/// both sides. Turning points at either end of the series are not counted.
pub fn turning_points(series: &[f64], delta: f64) -> Vec<usize> {
    let mut out = Vec::new();
    if series.len() < 3 {
        return out;
    }
    // +1 while rising, -1 while falling, 0 before the first reversal of size delta.
    let mut dir = 0i8;
    let (mut hi, mut lo) = (0usize, 0usize);
    for (i, &v) in series.iter().enumerate() {
        if v > series[hi] {
            hi = i;
        }
        if v < series[lo] {
            lo = i;
        }
        match dir {
            0 => {
                // The first extremum counts only if it is reached by a swing of delta.
                if series[hi] - v >= delta {
                    dir = -1;
                    if series[hi] - series[0] >= delta {
                        out.push(hi);
                    }
                    lo = i;
                } else if v - series[lo] >= delta {
                    dir = 1;
                    if series[0] - series[lo] >= delta {
                        out.push(lo);
                    }
                    hi = i;
                }
            }
            1 => {
                if series[hi] - v >= delta {
                    out.push(hi);
                    dir = -1;
                    lo = i;
                }
            }
            _ => {
                if v - series[lo] >= delta {
                    out.push(lo);
                    dir = 1;
                    hi = i;
                }
            }
        }
    }
    out.retain(|&i| i != 0 && i + 1 != series.len());
    out
}

/// Structural comparison of `|ψ_num|` with the genus-one wave along a line `x = const`.
#[derive(Clone, Debug, PartialEq)]
pub struct S2Structure {
    pub x: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    /// `|Δ(Ω/ε)|` across the patch.
    pub phase_increment: f64,
    /// Two turning points per period of the fast phase.
    pub predicted_extrema: f64,
    pub counted_extrema: usize,
    pub times: Vec<f64>,
    pub abs_numeric: Vec<f64>,
}

/// Runs the solver on `t ∈ [t_lo, t_hi]` at `x` (which must be a solver node)
/// and counts turning points of `|ψ_num|` of size at least `delta`.
pub fn s2_structure(
    x: f64,
    t_range: (f64, f64),
    samples: usize,
    delta: f64,
    p: &BarrierParams,
    solver: &SolverOverrides,
    quad: &QuadratureSpec,
) -> Result<S2Structure> {
    let (t_lo, t_hi) = t_range;
    if !(samples >= 3 && t_lo > 0.0 && t_hi > t_lo) {
        return Err(Error::Input("need at least 3 samples on a non-empty positive time range".into()));
    }
    let omega = |t: f64| -> Result<f64> {
        let st = solve_endpoint_with((p.l() - x.abs()) / (2.0 * t), p.q(), quad)?;
        Ok(modulation_constants(st.alpha, x.abs(), t, p, quad)?.omega)
    };
    let phase_increment = ((omega(t_hi)? - omega(t_lo)?) / p.eps()).abs();
    let times: Vec<f64> = GridSpec::axis(t_range, samples);
    let cfg = solver.build(*p, t_hi, times.clone())?;
    let j = cfg
        .nodes()
        .iter()
        .position(|&v| (v - x).abs() <= 1e-12 * cfg.half_width())
        .ok_or_else(|| Error::Input(format!("x = {x} is not a solver node")))?;
    let snaps = evolve(&cfg)?;
    let abs_numeric: Vec<f64> = snaps.iter().take(samples).map(|s| s.values[j].norm()).collect();
    let counted_extrema = turning_points(&abs_numeric, delta).len();
    Ok(S2Structure {
        x,
        t_lo,
        t_hi,
        phase_increment,
        predicted_extrema: 2.0 * phase_increment / (2.0 * std::f64::consts::PI),
        counted_extrema,
        times,
        abs_numeric,
    })
}

/// Parsed run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub q: f64,
    pub l: f64,
    pub eps: f64,
    pub grid: GridSpec,
    pub mode: Mode,
    pub solver: SolverOverrides,
    pub quad_tol: Option<f64>,
    pub t2_tol: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            q: 1.0,
            l: 1.0,
            eps: 0.05,
            grid: GridSpec { x_range: (-1.5, 1.5), t_range: (0.0, 0.3), nx: 61, nt: 7 },
            mode: Mode::Asymptotic,
            solver: SolverOverrides::default(),
            quad_tol: None,
            t2_tol: None,
        }
    }
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment. Unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            cfg.set(key.trim(), value.trim()).map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    /// Sets one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let real = || value.parse::<f64>().map_err(|_| Error::Config(format!("'{key}' expects a number, got '{value}'")));
        let int = || value.parse::<usize>().map_err(|_| Error::Config(format!("'{key}' expects an integer, got '{value}'")));
        match key {
            "q" => self.q = real()?,
            "L" => self.l = real()?,
            "eps" => self.eps = real()?,
            "x_min" => self.grid.x_range.0 = real()?,
            "x_max" => self.grid.x_range.1 = real()?,
            "t_min" => self.grid.t_range.0 = real()?,
            "t_max" => self.grid.t_range.1 = real()?,
            "nx" => self.grid.nx = int()?,
            "nt" => self.grid.nt = int()?,
            "mode" => self.mode = value.parse()?,
            "solver.half_width" => self.solver.half_width = Some(real()?),
            "solver.grid_points" => self.solver.grid_points = Some(int()?),
            "solver.dt" => self.solver.dt = Some(real()?),
            "tol.quad" => self.quad_tol = Some(real()?),
            "tol.t2" => self.t2_tol = Some(real()?),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn params(&self) -> Result<BarrierParams> {
        BarrierParams::new(self.q, self.l, self.eps)
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        match self.quad_tol {
            Some(t) => QuadratureSpec::default().with_tol(t),
            None => QuadratureSpec::default(),
        }
    }

    pub fn classifier(&self) -> Result<Classifier> {
        Ok(Classifier::with_tol(self.params()?, self.t2_tol.unwrap_or(T2_TOL)))
    }
}

/// Number with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// `region,T1,T2` line of the `classify` command.
pub fn classify_line(r: &Region) -> String {
    format!("{},{},{}", r.label.as_str(), fmt_opt(r.t1), fmt_opt(r.t2))
}

/// CSV with header `x,T1,T2`; `T2` is empty when its search fails.
pub fn breaking_curves_csv(xs: &[f64], classifier: &Classifier) -> String {
    let rows: Vec<String> = xs
        .par_iter()
        .map(|&x| {
            let t1 = first_breaking_time(x, classifier.params()).ok();
            let t2 = t1.and_then(|_| classifier.t2(x));
            format!("{},{},{}\n", fmt_num(x), fmt_opt(t1), fmt_opt(t2))
        })
        .collect();
    let mut s = String::from("x,T1,T2\n");
    rows.iter().for_each(|r| s.push_str(r));
    s
}

/// CSV with header `x,t,region,re_psi,im_psi,abs_psi`. Beyond-scope points,
/// and points whose evaluation failed, have empty value fields. Numeric
/// values are used when present, otherwise asymptotic ones.
pub fn field_csv(report: &SampleReport, prefer_numeric: bool) -> String {
    let mut s = String::from("x,t,region,re_psi,im_psi,abs_psi\n");
    for p in &report.points {
        let v = if prefer_numeric { p.numeric.or(p.asymptotic) } else { p.asymptotic.or(p.numeric) };
        let _ = match v {
            Some(v) => writeln!(
                s,
                "{},{},{},{},{},{}",
                fmt_num(p.x),
                fmt_num(p.t),
                p.region.label.as_str(),
                fmt_num(v.re),
                fmt_num(v.im),
                fmt_num(v.norm())
            ),
            None => writeln!(s, "{},{},{},,,", fmt_num(p.x), fmt_num(p.t), p.region.label.as_str()),
        };
    }
    s
}

/// CSV with header `eps,region,patch_lo,patch_hi,linf,l2` followed by a
/// `# summary {...}` record listing the error ratios between consecutive `ε`.
pub fn validation_csv(records: &[ValidationRecord]) -> String {
    let mut s = String::from("eps,region,patch_lo,patch_hi,linf,l2\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_num(r.eps),
            r.region.as_str(),
            fmt_num(r.patch_lo),
            fmt_num(r.patch_hi),
            fmt_num(r.linf),
            fmt_num(r.l2)
        );
    }
    let mut entries = Vec::new();
    for (i, a) in records.iter().enumerate() {
        if let Some(b) = records[i + 1..]
            .iter()
            .find(|b| b.region == a.region && b.patch_lo == a.patch_lo && b.patch_hi == a.patch_hi)
        {
            entries.push(format!(
                "{{\"region\": \"{}\", \"eps_from\": {}, \"eps_to\": {}, \"linf_ratio\": {}}}",
                a.region.as_str(),
                fmt_num(a.eps),
                fmt_num(b.eps),
                fmt_num(b.linf / a.linf)
            ));
        }
    }
    let _ = writeln!(s, "# summary {{\"records\": {}, \"ratios\": [{}]}}", records.len(), entries.join(", "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> BarrierParams {
        BarrierParams::new(1.0, 1.0, 0.05).unwrap()
    }

    #[test]
    fn classification_examples() {
        let p = params();
        assert_eq!(classify(2.0, 0.5, &p).label, RegionLabel::S0);
        let r = classify(0.0, 0.15, &p);
        assert_eq!(r.label, RegionLabel::S1);
        assert!((r.t1.unwrap() - 0.353_553_390_593_273_8).abs() < 1e-15);
        // T₂(0) = T₁(0), so the genus-one region is empty above the center.
        let r = classify(0.0, 0.5, &p);
        assert_eq!(r.label, RegionLabel::BeyondScope);
        assert!(r.t2.is_some());
        assert_eq!(classify(0.5, 0.25, &p).label, RegionLabel::S2);
        assert_eq!(classify(1.0, 0.1, &p).label, RegionLabel::BeyondScope);
        let t1 = first_breaking_time(0.5, &p).unwrap();
        assert_eq!(classify(0.5, t1, &p).label, RegionLabel::BeyondScope);
    }

    #[test]
    fn cache_is_shared_and_symmetric() {
        let c = Classifier::new(params());
        let a = c.t2(0.5).unwrap();
        assert_eq!(c.t2(-0.5), Some(a));
        assert_eq!(c.cache.read().unwrap().len(), 1);
    }

    #[test]
    fn config_parsing() {
        let text = "# comment\nq = 1.0\nL=2\neps = 0.1 # trailing\nnx = 5\nmode = both\nsolver.grid_points = 4096\ntol.quad = 1e-10\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!((c.q, c.l, c.eps, c.grid.nx, c.mode), (1.0, 2.0, 0.1, 5, Mode::Both));
        assert_eq!(c.solver.grid_points, Some(4096));
        assert_eq!(c.quad_tol, Some(1e-10));
        assert!(RunConfig::parse("bogus = 1").is_err());
        assert!(RunConfig::parse("q 1").is_err());
        assert!(RunConfig::parse("nx = 2.5").is_err());
    }

    #[test]
    fn asymptotic_grids() {
        let p = params();
        let quad = QuadratureSpec::default();
        let c = Classifier::new(p);
        let s0 = GridSpec { x_range: (1.5, 2.0), t_range: (0.0, 0.5), nx: 5, nt: 3 };
        let r = sample_grid(&s0, &p, Mode::Asymptotic, &SolverOverrides::default(), &quad, &c).unwrap();
        assert!(r.points.iter().all(|pt| pt.asymptotic == Some(C::new(0.0, 0.0))));
        let s1 = GridSpec { x_range: (-0.5, 0.5), t_range: (0.0, 0.15), nx: 5, nt: 3 };
        let r = sample_grid(&s1, &p, Mode::Asymptotic, &SolverOverrides::default(), &quad, &c).unwrap();
        assert!(r.points.iter().all(|pt| (pt.asymptotic.unwrap().norm() - 1.0).abs() < 1e-12));
        let mixed = GridSpec { x_range: (-1.5, 1.5), t_range: (0.0, 0.4), nx: 7, nt: 3 };
        let r = sample_grid(&mixed, &p, Mode::Asymptotic, &SolverOverrides::default(), &quad, &c).unwrap();
        assert_eq!(r.points.len(), 21);
        for pt in &r.points {
            assert_eq!(pt.asymptotic.is_none(), pt.region.label == RegionLabel::BeyondScope || r.failures.iter().any(|f| f.x == pt.x && f.t == pt.t));
        }
        let again = sample_grid(&mixed, &p, Mode::Asymptotic, &SolverOverrides::default(), &quad, &c).unwrap();
        assert_eq!(field_csv(&r, false), field_csv(&again, false));
    }

    #[test]
    fn csv_formats() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        let r = Region { label: RegionLabel::S1, t1: Some(0.5), t2: None };
        assert_eq!(classify_line(&r), "S1,5.0000000000000000e-1,");
        let c = Classifier::new(params());
        let csv = breaking_curves_csv(&[0.25, 2.0], &c);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,T1,T2");
        assert!(lines[2].ends_with(",,"));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn turning_point_detection() {
        let s: Vec<f64> = (0..200).map(|i| (i as f64 * 0.1).sin() + 0.02 * ((i * 7) % 3) as f64).collect();
        let tp = turning_points(&s, 0.5);
        // sin over [0, 19.9] has interior extrema near π/2 + kπ, k = 0..5.
        assert_eq!(tp.len(), 6, "{tp:?}");
        assert!(turning_points(&[1.0, 0.5, 0.0], 0.1).is_empty());
        assert_eq!(turning_points(&[1.0, 0.0, 1.0], 0.1), vec![1]);
        assert!(turning_points(&[1.0, 1.05, 1.0, 0.0], 0.1).is_empty());
    }
}
