//! Geometry of the modified phases: topology of the zero level of
//! `Im φ₀`, a predictor–corrector tracer for zero-level curves, the
//! genus-zero band contour, the real roots of the genus-one phase `ρ₁`,
//! and the breaking curves `T₁(x)`, `T₂(x)`.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::genus1::solve_endpoint;
use crate::scattering::BarrierParams;

type C = Complex64;

/// Stage of the zero level `L(t; b)` of `Im φ₀`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelCase {
    /// `t = 0`: the level set is `ℝ ∪ [-iq, iq]`.
    Initial,
    /// `0 < t ≤ T_c(b)`: a finite arc from `iq` to `-iq` meets `ℝ` at `z₀`,
    /// and the infinite branch meets `ℝ` at `z₁`.
    PreBreak,
    /// `t > T_c(b)`: no real crossings.
    PostBreak,
}

/// Topology of the zero level of `Im φ₀` for `φ₀ = 2ν(tz + b) - tq²`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelTopology {
    pub case: LevelCase,
    /// Real crossings `z₀`, `z₁` with `|z₀| ≤ |z₁|` (pre-break only).
    pub crossings: Vec<f64>,
    /// Asymptote `Re z = -b/(2t)` of the infinite branch, for `t > 0`.
    pub asymptote: Option<f64>,
}

/// Critical time `T_c(b) = |b|/(2√2 q)` at which the two crossings merge.
pub fn critical_time(b: f64, q: f64) -> f64 {
    b.abs() / (2.0 * SQRT_2 * q)
}

/// Classifies the zero level of `Im φ₀` at `(b, t)`.
pub fn level_topology(b: f64, t: f64, q: f64) -> Result<LevelTopology> {
    if b == 0.0 || !b.is_finite() {
        return Err(Error::Domain(format!("level topology needs b != 0, got {b}")));
    }
    if !(t >= 0.0) || !(q > 0.0) {
        return Err(Error::Domain(format!("need t >= 0 and q > 0, got t = {t}, q = {q}")));
    }
    if t == 0.0 {
        return Ok(LevelTopology { case: LevelCase::Initial, crossings: vec![], asymptote: None });
    }
    let asymptote = Some(-b / (2.0 * t));
    if t > critical_time(b, q) {
        return Ok(LevelTopology { case: LevelCase::PostBreak, crossings: vec![], asymptote });
    }
    let disc = (1.0 - 8.0 * t * t * q * q / (b * b)).max(0.0).sqrt();
    let z0 = -(b / (4.0 * t)) * (1.0 - disc);
    let z1 = -(b / (4.0 * t)) * (1.0 + disc);
    Ok(LevelTopology { case: LevelCase::PreBreak, crossings: vec![z0, z1], asymptote })
}

/// Settings for [`trace_zero_level`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    /// Largest step along the curve.
    pub max_step: f64,
    /// Smallest step before the trace gives up.
    pub min_step: f64,
    /// Target for `|Im phase|` at every accepted point.
    pub tolerance: f64,
    /// Corrector iterations allowed per step before the step is halved.
    pub max_corrector_iterations: usize,
    /// Hard limit on the number of points.
    pub max_points: usize,
}

impl TraceOptions {
    /// Defaults scaled to the amplitude `q`: base step `1e-2 q`.
    pub fn for_amplitude(q: f64) -> Self {
        Self { max_step: 1e-2 * q, min_step: 1e-9 * q, tolerance: 1e-12, max_corrector_iterations: 5, max_points: 200_000 }
    }
}

/// Conditions that end a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct StopRule {
    /// Branch points at which the trace terminates when within one step.
    pub branch_points: Vec<C>,
    /// Stop on reaching the real axis and refine to the real critical point
    /// (for phases that are real on `ℝ`).
    pub real_axis: bool,
    /// Stop when `|z|` exceeds this radius.
    pub radius: f64,
}

/// How a traced contour ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Terminus {
    /// The seed point.
    Seed(C),
    /// A branch point listed in the stop rule.
    BranchPoint(C),
    /// A real critical point of the phase.
    RealCriticalPoint(f64),
    /// Truncated at the stop radius.
    Radius(C),
}

/// Polyline along a zero level of `Im phase`.
#[derive(Clone, Debug, PartialEq)]
pub struct TracedContour {
    pub points: Vec<C>,
    pub start: Terminus,
    pub end: Terminus,
}

impl TracedContour {
    /// Complex-conjugate mirror image, traversed in the same order.
    pub fn conjugate(&self) -> TracedContour {
        let flip = |t: Terminus| match t {
            Terminus::Seed(z) => Terminus::Seed(z.conj()),
            Terminus::BranchPoint(z) => Terminus::BranchPoint(z.conj()),
            Terminus::Radius(z) => Terminus::Radius(z.conj()),
            other => other,
        };
        TracedContour { points: self.points.iter().map(|z| z.conj()).collect(), start: flip(self.start), end: flip(self.end) }
    }
}

/// Drives `Im f = 0` by Newton steps along the normal `i·conj(f')/|f'|`.
fn correct<F: Fn(C) -> Result<(C, C)>>(phase: &F, mut z: C, opts: &TraceOptions) -> Result<Option<C>> {
    for _ in 0..=opts.max_corrector_iterations {
        let (f, df) = phase(z)?;
        let g = df.norm();
        if g < 1e-12 {
            return Err(Error::Saddle(z));
        }
        if f.im.abs() < opts.tolerance {
            return Ok(Some(z));
        }
        let normal = C::i() * df.conj() / g;
        z += normal * (-f.im / g);
    }
    Ok(None)
}

/// Real critical point of a phase that is real on `ℝ`, near `x_start`.
fn real_critical_point<F: Fn(C) -> Result<(C, C)>>(phase: &F, x_start: f64, width: f64) -> Result<f64> {
    let g = |x: f64| -> Result<f64> { Ok(phase(C::new(x, 0.0))?.1.re) };
    let mut half = width;
    for _ in 0..40 {
        let (a, b) = (x_start - half, x_start + half);
        let (mut ga, gb) = (g(a)?, g(b)?);
        if ga * gb <= 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid)?;
                if gm == 0.0 || hi - lo < 1e-15 * mid.abs().max(1e-300) {
                    return Ok(mid);
                }
                if ga * gm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    ga = gm;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        half *= 1.6;
    }
    Err(Error::Search(format!("no real critical point found near {x_start}")))
}

/// Marches along `Im phase = 0` from `seed` (which must lie on the level
/// set) in the direction closest to `direction`, until a stop condition
/// fires. `phase` returns the value and the complex derivative.
pub fn trace_zero_level<F: Fn(C) -> Result<(C, C)>>(
    phase: F,
    seed: C,
    direction: C,
    stop: &StopRule,
    opts: &TraceOptions,
) -> Result<TracedContour> {
    let (f0, _) = phase(seed)?;
    if f0.im.abs() > 1e-9 {
        return Err(Error::Input(format!("seed {seed} is not on the zero level (Im phase = {:e})", f0.im)));
    }
    let mut points = vec![seed];
    let mut z = seed;
    let mut tangent = direction / direction.norm();
    let mut h = opts.max_step;
    let mut first = true;
    loop {
        if points.len() >= opts.max_points {
            return Err(Error::Path(format!("trace exceeded {} points", opts.max_points)));
        }
        // Branch point termination (the seed itself never counts).
        for &bp in &stop.branch_points {
            if (z - bp).norm() <= 1.5 * h && (bp - seed).norm() > 1e-12 && !first {
                points.push(bp);
                return Ok(TracedContour { points, start: Terminus::Seed(seed), end: Terminus::BranchPoint(bp) });
            }
        }
        if z.norm() > stop.radius {
            return Ok(TracedContour { points, start: Terminus::Seed(seed), end: Terminus::Radius(z) });
        }
        // Tangent of the level curve, oriented to continue the previous direction.
        let dir = if first {
            tangent
        } else {
            let (_, df) = phase(z)?;
            if df.norm() < 1e-12 {
                return Err(Error::Saddle(z));
            }
            let t = df.conj() / df.norm();
            if (t * tangent.conj()).re >= 0.0 {
                t
            } else {
                -t
            }
        };
        let mut accepted = None;
        while h >= opts.min_step {
            let predicted = z + dir * h;
            if stop.real_axis && (predicted.im <= 0.0 || predicted.im < 0.5 * h) && z.im > 0.0 {
                break;
            }
            match correct(&phase, predicted, opts)? {
                Some(next) if (next - z).norm() <= 2.0 * h && ((next - z) * dir.conj()).re > 0.0 => {
                    accepted = Some(next);
                    break;
                }
                _ => h *= 0.5,
            }
        }
        let reached_axis = stop.real_axis && accepted.is_none_or(|n: C| n.im < 0.5 * h);
        if reached_axis && h >= opts.min_step {
            let xc = real_critical_point(&phase, z.re, 2.0 * h.max(z.im))?;
            points.push(C::new(xc, 0.0));
            return Ok(TracedContour { points, start: Terminus::Seed(seed), end: Terminus::RealCriticalPoint(xc) });
        }
        let next = accepted.ok_or_else(|| Error::Path(format!("trace stalled at {z}: step fell below minimum")))?;
        tangent = (next - z) / (next - z).norm();
        z = next;
        points.push(z);
        first = false;
        h = (2.0 * h).min(opts.max_step);
    }
}

/// `φ₀(z) = 2ν(tz + b) - tq²` and its derivative, with `ν` cut on `[-iq, iq]`.
pub fn genus0_phase(z: C, b: f64, t: f64, q: f64) -> (C, C) {
    let w = C::new(q, 0.0) / z;
    let nu = z * (1.0 + w * w).sqrt();
    let f = 2.0 * nu * (t * z + b) - t * q * q;
    let df = 2.0 * (2.0 * t * z * z + b * z + t * q * q) / nu;
    (f, df)
}

/// Upper half of the finite genus-zero band: the zero level of `Im φ₀`
/// from `iq` to the real critical point `z₀`.
pub fn trace_genus0_band(b: f64, t: f64, q: f64, opts: &TraceOptions) -> Result<TracedContour> {
    let topo = level_topology(b, t, q)?;
    if topo.case != LevelCase::PreBreak {
        return Err(Error::Region(format!("no finite band crossing for b = {b}, t = {t}")));
    }
    let iq = C::new(0.0, q);
    // φ₀ - φ₀(iq) ≈ C √(z - iq) with C = 2(itq + b)√(2iq); Im = 0 along arg = -2 arg C.
    let c = 2.0 * C::new(b, t * q) * (2.0 * iq).sqrt();
    let direction = C::from_polar(1.0, -2.0 * c.arg());
    let stop = StopRule { branch_points: vec![], real_axis: true, radius: 1e3 * q.max(b.abs() / t) };
    let phase = |z: C| -> Result<(C, C)> { Ok(genus0_phase(z, b, t, q)) };
    let mut contour = trace_zero_level(phase, iq, direction, &stop, opts)?;
    contour.start = Terminus::BranchPoint(iq);
    Ok(contour)
}

/// Infinite branch of the zero level of `Im φ₀`, seeded at height `3q` near
/// the asymptote and traced down to its real crossing.
pub fn trace_genus0_infinite_branch(b: f64, t: f64, q: f64, opts: &TraceOptions) -> Result<TracedContour> {
    let topo = level_topology(b, t, q)?;
    let x_asym = topo.asymptote.ok_or_else(|| Error::Domain("infinite branch needs t > 0".into()))?;
    let y = 3.0 * q;
    let im_phase = |x: f64| genus0_phase(C::new(x, y), b, t, q).0.im;
    // Secant iteration in x on the horizontal line Im z = 3q.
    let (mut x0, mut x1) = (x_asym, x_asym + 1e-3 * q);
    let (mut f0, mut f1) = (im_phase(x0), im_phase(x1));
    for _ in 0..100 {
        if f1.abs() < 1e-14 || f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = im_phase(x1);
    }
    let phase = |z: C| -> Result<(C, C)> { Ok(genus0_phase(z, b, t, q)) };
    let seed = correct(&phase, C::new(x1, y), opts)?.ok_or_else(|| Error::Search("could not seed the infinite branch".into()))?;
    let stop = StopRule { branch_points: vec![], real_axis: true, radius: 1e3 * q.max(b.abs() / t) };
    trace_zero_level(phase, seed, C::new(0.0, -1.0), &stop, opts)
}

/// Real negative zeros of `ρ₁(λ) = 4tS(λ)(λ - ξ₀) + 4Lλ/ν(λ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rho1Roots {
    /// Roots in increasing order; a double root appears once.
    pub roots: Vec<f64>,
    /// Whether the single reported root is double.
    pub double: bool,
    /// Location of the maximum of `ρ₁ √(λ² + q²)/4` on `λ < 0`.
    pub lambda_star: f64,
    /// Value of that maximum.
    pub h_max: f64,
    /// `ρ₁(λ*)` and `ρ₁'(λ*)`.
    pub rho_at_star: f64,
    pub drho_at_star: f64,
}

/// `h(λ) = t|λ - α|(λ - ξ₀) + L|λ|` on `λ < 0`; `ρ₁ = 4h/√(λ² + q²)` there,
/// since `S(λ) = |λ - α|/√(λ² + q²)` on the real axis.
fn rho1_h(lambda: f64, alpha: C, xi0: f64, t: f64, l: f64) -> (f64, f64) {
    let d = C::new(lambda, 0.0) - alpha;
    let mod_d = d.norm();
    let h = t * mod_d * (lambda - xi0) + l * lambda.abs();
    let dh = t * ((lambda - alpha.re) / mod_d * (lambda - xi0) + mod_d) - l;
    (h, dh)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo).abs() <= 4.0 * f64::EPSILON * mid.abs().max(1e-300) {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Relative threshold below which the maximum of `h` counts as a double root.
const DOUBLE_ROOT_TOL: f64 = 1e-11;

/// Real roots of `ρ₁` on `λ < 0`.
pub fn rho1_real_roots(alpha: C, xi0: f64, t: f64, l: f64, q: f64) -> Result<Rho1Roots> {
    if !(alpha.im > 0.0) || !(xi0 > 0.0) || !(t > 0.0) || !(l > 0.0) || !(q > 0.0) {
        return Err(Error::Domain(format!(
            "rho1 roots need alpha in C+, xi0 > 0, t, L, q > 0 (alpha = {alpha}, xi0 = {xi0}, t = {t})"
        )));
    }
    let h = |x: f64| rho1_h(x, alpha, xi0, t, l);
    // h > 0 needs L|λ| > t|λ - α|(ξ₀ - λ) ≥ tλ², so all roots lie in (-L/t, 0).
    let span = 2.0 * (l / t + xi0 + alpha.norm()) + q;
    let n = 4000;
    let grid: Vec<f64> = (0..n).map(|k| -span * (1.0 - k as f64 / n as f64)).collect();
    let values: Vec<f64> = grid.iter().map(|&x| h(x).0).collect();
    let (jmax, _) = values.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let sign_changes = values.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count();
    if sign_changes > 2 {
        return Err(Error::Consistency(format!("rho_1 shows {sign_changes} sign changes on the negative axis")));
    }
    let lo = grid[jmax.saturating_sub(1)];
    let hi = if jmax + 1 < n { grid[jmax + 1] } else { 0.0 };
    let lambda_star = if h(lo).1 > 0.0 && h(hi).1 < 0.0 { bisect(|x| h(x).1, lo, hi) } else { grid[jmax] };
    let (h_max, dh_star) = h(lambda_star);
    let root_q = (lambda_star * lambda_star + q * q).sqrt();
    let rho_at_star = 4.0 * h_max / root_q;
    let drho_at_star = 4.0 * dh_star / root_q - 4.0 * h_max * lambda_star / root_q.powi(3);
    let scale = l * lambda_star.abs().max(q) + t * q * q;
    let mut out = Rho1Roots { roots: vec![], double: false, lambda_star, h_max, rho_at_star, drho_at_star };
    if h_max.abs() <= DOUBLE_ROOT_TOL * scale {
        out.roots = vec![lambda_star];
        out.double = true;
    } else if h_max > 0.0 {
        let left = bisect(|x| h(x).0, -span, lambda_star);
        let right = bisect(|x| h(x).0, lambda_star, 0.0);
        out.roots = vec![left, right];
    }
    Ok(out)
}

/// First breaking time `T₁(x) = (L - |x|)/(2√2 q)`.
pub fn first_breaking_time(x: f64, p: &BarrierParams) -> Result<f64> {
    if !(x.abs() < p.l()) {
        return Err(Error::Domain(format!("T1 is defined for |x| < L, got x = {x}")));
    }
    Ok((p.l() - x.abs()) / (2.0 * SQRT_2 * p.q()))
}

/// Second breaking time together with the double root it produces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondBreaking {
    pub t2: f64,
    pub lambda_double: f64,
    pub residual_rho: f64,
    pub residual_drho: f64,
}

/// `max_{λ<0} h(λ)` at `(x, t)`, with `α` solved at `μ = (L - |x|)/(2t)`.
fn rho1_discriminant(x: f64, t: f64, p: &BarrierParams) -> Result<Rho1Roots> {
    let mu = (p.l() - x.abs()) / (2.0 * t);
    let st = solve_endpoint(mu, p.q())?;
    rho1_real_roots(st.alpha, mu - st.alpha.re, t, p.l(), p.q())
}

/// Second breaking time `T₂(x)`, where `ρ₁` acquires a double negative root.
///
/// The search runs in `t` at fixed `x` over `(T₁, 10 T₁]`, widened
/// geometrically if no sign change of the discriminant is found. By
/// symmetry of the data, `T₂(x) = T₂(|x|)`. At `x = 0` the double root is
/// already present at `T₁`, so `T₂(0) = T₁(0)`.
pub fn second_breaking_time(x: f64, p: &BarrierParams, tol: f64) -> Result<f64> {
    second_breaking_detail(x, p, tol).map(|s| s.t2)
}

/// [`second_breaking_time`] with the double root and its residuals.
pub fn second_breaking_detail(x: f64, p: &BarrierParams, tol: f64) -> Result<SecondBreaking> {
    let t1 = first_breaking_time(x, p)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let x = x.abs();
    let d = |t: f64| rho1_discriminant(x, t, p).map(|r| r.h_max);
    let lo0 = t1 * (1.0 + 1e-6);
    let d_lo = d(lo0)?;
    if !(d_lo > 0.0) {
        // At t = T₁ the endpoint is α = ξ₀ = q/√2 and h(λ) = -T₁(q/√2 - λ)² + L|λ|,
        // whose maximum L(L/(4T₁) - q/√2) vanishes exactly when x = 0: both
        // breakings then coincide and the genus-one region is empty.
        let a = p.q() / SQRT_2;
        let lambda = a - p.l() / (2.0 * t1);
        let h_max = -t1 * (a - lambda).powi(2) + p.l() * lambda.abs();
        let scale = p.l() * p.q();
        if h_max.abs() <= 1e-12 * scale {
            let root_q = (lambda * lambda + p.q() * p.q()).sqrt();
            return Ok(SecondBreaking {
                t2: t1,
                lambda_double: lambda,
                residual_rho: (4.0 * h_max / root_q).abs(),
                residual_drho: (4.0 * (2.0 * t1 * (a - lambda) - p.l()) / root_q).abs(),
            });
        }
        return Err(Error::Search(format!("rho_1 has no real roots just after T1 at x = {x} (max h = {d_lo:e})")));
    }
    let mut hi = 10.0 * t1;
    let mut d_hi = d(hi)?;
    let mut widenings = 0;
    while d_hi > 0.0 {
        widenings += 1;
        if widenings > 6 {
            return Err(Error::Search(format!("no sign change of the rho_1 discriminant on (T1, {hi}] at x = {x}")));
        }
        hi *= 2.0;
        d_hi = d(hi)?;
    }
    // Scan for uniqueness of the sign change.
    let scan = 24;
    let mut changes = 0;
    let mut prev = d_lo;
    let mut bracket = (lo0, hi);
    for k in 1..=scan {
        let t = lo0 + (hi - lo0) * k as f64 / scan as f64;
        let v = d(t)?;
        if (v > 0.0) != (prev > 0.0) {
            changes += 1;
            if changes == 1 {
                bracket = (lo0 + (hi - lo0) * (k - 1) as f64 / scan as f64, t);
            }
        }
        prev = v;
    }
    if changes != 1 {
        return Err(Error::Search(format!("expected one sign change of the rho_1 discriminant, found {changes} at x = {x}")));
    }
    let (mut a, mut b) = bracket;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a <= 4.0 * f64::EPSILON * mid {
            break;
        }
        if d(mid)? > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let t2 = 0.5 * (a + b);
    let r = rho1_discriminant(x, t2, p)?;
    let out = SecondBreaking {
        t2,
        lambda_double: r.lambda_star,
        residual_rho: r.rho_at_star.abs(),
        residual_drho: r.drho_at_star.abs(),
    };
    if out.residual_rho > tol || out.residual_drho > tol {
        return Err(Error::Search(format!(
            "double-root residuals |rho1| = {:e}, |rho1'| = {:e} exceed tol {tol:e} at T2 = {t2}",
            out.residual_rho, out.residual_drho
        )));
    }
    Ok(out)
}
