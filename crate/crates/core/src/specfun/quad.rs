//! Adaptive Gauss–Legendre quadrature along complex paths.
//!
//! Every path is reduced to pieces parametrized over `u ∈ [0, 1]`. Each
//! panel is integrated with a fixed Gauss–Legendre rule and again with the
//! same rule on its two halves; the difference is the panel error estimate
//! and the refined value is kept. Panels with the largest estimate are
//! bisected until the total estimate meets the target tolerance.
//!
//! Declared endpoint singularities are absorbed by polynomial substitutions
//! (`u²` for inverse square roots, `u³` for logarithms) before any nodes
//! are placed, and semi-infinite rays are mapped by `λ = a + s·v(u)/(1-u)`.

use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

/// Kind of integrable endpoint singularity carried by the integrand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EndpointSingularity {
    #[default]
    None,
    InverseSqrtLeft,
    InverseSqrtRight,
    InverseSqrtBoth,
    LogLeft,
    LogRight,
}

/// Tolerance and singularity declaration for [`quad_path`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub target_abs_tol: f64,
    pub max_subdivisions: usize,
    pub endpoint_singularity: EndpointSingularity,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            target_abs_tol: 1e-12,
            max_subdivisions: 4000,
            endpoint_singularity: EndpointSingularity::None,
        }
    }
}

impl QuadratureSpec {
    /// Validated constructor.
    pub fn new(target_abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(target_abs_tol > 0.0) || !target_abs_tol.is_finite() {
            return Err(Error::Domain(format!("tolerance must be positive, got {target_abs_tol}")));
        }
        if max_subdivisions == 0 {
            return Err(Error::Domain("max_subdivisions must be at least 1".into()));
        }
        Ok(Self { target_abs_tol, max_subdivisions, endpoint_singularity: EndpointSingularity::None })
    }

    /// Same spec with a different endpoint declaration.
    pub fn with_singularity(self, endpoint_singularity: EndpointSingularity) -> Self {
        Self { endpoint_singularity, ..self }
    }

    /// Same spec with a different tolerance.
    pub fn with_tol(self, target_abs_tol: f64) -> Self {
        Self { target_abs_tol, ..self }
    }
}

/// Integration path in the complex plane.
#[derive(Clone, Debug)]
pub enum Path {
    /// Straight segment `from → to`.
    Segment { from: C, to: C },
    /// Ray `from + s·direction`, `s ∈ [0, ∞)`, on which the integrand
    /// decays like `|z|^{-decay_rate}`; `scale` sets where the map puts `u = 1/2`.
    Ray { from: C, direction: C, scale: f64, decay_rate: f64 },
    /// Circular arc `center + radius·e^{iθ}` with θ running from start to end.
    Arc { center: C, radius: f64, theta_start: f64, theta_end: f64 },
    /// Connected chain of straight segments.
    Polyline(Vec<C>),
    /// Concatenation of sub-paths, traversed in order.
    Chain(Vec<Path>),
}

impl Path {
    pub fn segment(from: C, to: C) -> Self {
        Path::Segment { from, to }
    }

    /// Ray from `from` in the direction of `direction` (normalized here).
    pub fn ray(from: C, direction: C, decay_rate: f64) -> Self {
        Path::Ray { from, direction: direction / direction.norm(), scale: 1.0, decay_rate }
    }

    /// Full counterclockwise circle.
    pub fn circle(center: C, radius: f64) -> Self {
        Path::Arc { center, radius, theta_start: 0.0, theta_end: 2.0 * PI }
    }

    /// Counterclockwise stadium enclosing the segment `a → b` at distance `offset`.
    pub fn stadium(a: C, b: C, offset: f64) -> Self {
        let d = (b - a) / (b - a).norm();
        let n = C::i() * d;
        let phi = d.arg();
        Path::Chain(vec![
            Path::segment(a - offset * n, b - offset * n),
            Path::Arc { center: b, radius: offset, theta_start: phi - 0.5 * PI, theta_end: phi + 0.5 * PI },
            Path::segment(b + offset * n, a + offset * n),
            Path::Arc { center: a, radius: offset, theta_start: phi + 0.5 * PI, theta_end: phi + 1.5 * PI },
        ])
    }

    /// Same point set traversed in the opposite direction. Rays cannot be reversed.
    pub fn reversed(&self) -> Result<Self> {
        Ok(match self {
            Path::Segment { from, to } => Path::Segment { from: *to, to: *from },
            Path::Arc { center, radius, theta_start, theta_end } => Path::Arc {
                center: *center,
                radius: *radius,
                theta_start: *theta_end,
                theta_end: *theta_start,
            },
            Path::Polyline(p) => Path::Polyline(p.iter().rev().copied().collect()),
            Path::Chain(v) => Path::Chain(v.iter().rev().map(|p| p.reversed()).collect::<Result<_>>()?),
            Path::Ray { .. } => return Err(Error::Path("a semi-infinite ray cannot be reversed".into())),
        })
    }
}

/// Gauss–Legendre order used on every panel.
const GL_ORDER: usize = 15;

/// Nodes and weights on `[0, 1]`.
fn gauss_legendre() -> &'static [(f64, f64); GL_ORDER] {
    static RULE: OnceLock<[(f64, f64); GL_ORDER]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut rule = [(0.0, 0.0); GL_ORDER];
        for (i, slot) in rule.iter_mut().enumerate() {
            // Newton iteration on P_n from the Chebyshev-like initial guess.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0_f64, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            *slot = (0.5 * (1.0 - x), 0.5 * w);
        }
        rule
    })
}

/// Map `u ∈ [0,1] ↦ (z, dz/du)` for one primitive piece.
#[derive(Clone, Copy, Debug)]
enum Piece {
    Segment { a: C, b: C, power_left: u8, power_right: u8 },
    Ray { a: C, dir: C, power: u8 },
    Arc { center: C, radius: f64, t0: f64, t1: f64 },
}

impl Piece {
    fn eval(&self, u: f64) -> (C, C) {
        match *self {
            Piece::Segment { a, b, power_left, power_right } => {
                if power_left > 1 {
                    let p = power_left as i32;
                    let v = u.powi(p);
                    (a + (b - a) * v, (b - a) * (p as f64 * u.powi(p - 1)))
                } else if power_right > 1 {
                    let p = power_right as i32;
                    let s = 1.0 - u;
                    (b - (b - a) * s.powi(p), (b - a) * (p as f64 * s.powi(p - 1)))
                } else {
                    (a + (b - a) * u, b - a)
                }
            }
            Piece::Ray { a, dir, power } => {
                let p = power as i32;
                let v = u.powi(p);
                let dv = p as f64 * u.powi(p - 1);
                let s = 1.0 - u;
                (a + dir * (v / s), dir * ((dv * s + v) / (s * s)))
            }
            Piece::Arc { center, radius, t0, t1 } => {
                let th = t0 + (t1 - t0) * u;
                let e = C::from_polar(radius, th);
                (center + e, C::i() * e * (t1 - t0))
            }
        }
    }
}

fn flatten(path: &Path, out: &mut Vec<Piece>) -> Result<()> {
    match path {
        Path::Segment { from, to } => out.push(Piece::Segment { a: *from, b: *to, power_left: 1, power_right: 1 }),
        Path::Ray { from, direction, scale, decay_rate } => {
            if !(*decay_rate > 1.0) {
                return Err(Error::Domain(format!(
                    "semi-infinite path needs a decay rate above 1, got {decay_rate}"
                )));
            }
            out.push(Piece::Ray { a: *from, dir: *direction * *scale, power: 1 });
        }
        Path::Arc { center, radius, theta_start, theta_end } => {
            // Split long arcs so that no panel spans more than a quarter turn initially.
            let n = (((theta_end - theta_start).abs() / (0.5 * PI)).ceil() as usize).max(1);
            for k in 0..n {
                let t0 = theta_start + (theta_end - theta_start) * k as f64 / n as f64;
                let t1 = theta_start + (theta_end - theta_start) * (k + 1) as f64 / n as f64;
                out.push(Piece::Arc { center: *center, radius: *radius, t0, t1 });
            }
        }
        Path::Polyline(pts) => {
            if pts.len() < 2 {
                return Err(Error::Input("polyline needs at least two points".into()));
            }
            for w in pts.windows(2) {
                out.push(Piece::Segment { a: w[0], b: w[1], power_left: 1, power_right: 1 });
            }
        }
        Path::Chain(parts) => {
            for p in parts {
                flatten(p, out)?;
            }
        }
    }
    Ok(())
}

/// Applies the endpoint substitution to the first/last piece.
fn apply_singularity(pieces: &mut Vec<Piece>, sing: EndpointSingularity) -> Result<()> {
    use EndpointSingularity::*;
    let (left, right) = match sing {
        None => (1u8, 1u8),
        InverseSqrtLeft => (2, 1),
        InverseSqrtRight => (1, 2),
        InverseSqrtBoth => (2, 2),
        LogLeft => (3, 1),
        LogRight => (1, 3),
    };
    if left > 1 {
        match pieces.first_mut() {
            Some(Piece::Segment { power_left, .. }) => *power_left = left,
            Some(Piece::Ray { power, .. }) => *power = left,
            _ => return Err(Error::Input("left endpoint singularity needs a segment or ray first".into())),
        }
    }
    if right > 1 {
        let last = pieces.len() - 1;
        match pieces[last] {
            Piece::Segment { a, b, power_left, .. } => {
                if power_left > 1 {
                    // Both ends singular on one segment: split it at the midpoint.
                    let m = 0.5 * (a + b);
                    pieces[last] = Piece::Segment { a, b: m, power_left, power_right: 1 };
                    pieces.push(Piece::Segment { a: m, b, power_left: 1, power_right: right });
                } else {
                    pieces[last] = Piece::Segment { a, b, power_left: 1, power_right: right };
                }
            }
            _ => return Err(Error::Input("right endpoint singularity needs a finite segment last".into())),
        }
    }
    Ok(())
}

#[derive(Debug)]
struct Panel<const N: usize> {
    piece: usize,
    u0: f64,
    u1: f64,
    value: [C; N],
    err: f64,
    halves: [[C; N]; 2],
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn rule_on<const N: usize, F: Fn(C) -> [C; N]>(f: &F, piece: &Piece, u0: f64, u1: f64) -> [C; N] {
    let mut acc = [C::new(0.0, 0.0); N];
    let h = u1 - u0;
    for &(x, w) in gauss_legendre().iter() {
        let (z, dz) = piece.eval(u0 + h * x);
        let v = f(z);
        let scale = dz * (w * h);
        for k in 0..N {
            acc[k] += v[k] * scale;
        }
    }
    acc
}

fn make_panel<const N: usize, F: Fn(C) -> [C; N]>(
    f: &F,
    pieces: &[Piece],
    piece: usize,
    u0: f64,
    u1: f64,
    coarse: [C; N],
) -> Panel<N> {
    let um = 0.5 * (u0 + u1);
    let left = rule_on(f, &pieces[piece], u0, um);
    let right = rule_on(f, &pieces[piece], um, u1);
    let mut value = [C::new(0.0, 0.0); N];
    let mut err = 0.0_f64;
    for k in 0..N {
        value[k] = left[k] + right[k];
        let e = (value[k] - coarse[k]).norm();
        err = if e.is_nan() { f64::INFINITY } else { err.max(e) };
    }
    Panel { piece, u0, u1, value, err, halves: [left, right] }
}

/// Integrates a vector-valued integrand along `path`; the error control uses
/// the largest component error.
pub fn quad_path_vec<const N: usize, F: Fn(C) -> [C; N]>(f: F, path: &Path, spec: &QuadratureSpec) -> Result<[C; N]> {
    let mut pieces = Vec::new();
    flatten(path, &mut pieces)?;
    apply_singularity(&mut pieces, spec.endpoint_singularity)?;
    let mut heap = BinaryHeap::new();
    for i in 0..pieces.len() {
        let coarse = rule_on(&f, &pieces[i], 0.0, 1.0);
        heap.push(make_panel(&f, &pieces, i, 0.0, 1.0, coarse));
    }
    let mut subdivisions = 0usize;
    loop {
        let total_err: f64 = heap.iter().map(|p| p.err).sum();
        if total_err <= spec.target_abs_tol {
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            let mut est = [C::new(0.0, 0.0); N];
            for p in heap.iter() {
                for k in 0..N {
                    est[k] += p.value[k];
                }
            }
            return Err(Error::Convergence {
                context: "quad_path".into(),
                estimate: est[0],
                error_bound: total_err,
            });
        }
        let worst = heap.pop().expect("non-empty panel heap");
        let um = 0.5 * (worst.u0 + worst.u1);
        heap.push(make_panel(&f, &pieces, worst.piece, worst.u0, um, worst.halves[0]));
        heap.push(make_panel(&f, &pieces, worst.piece, um, worst.u1, worst.halves[1]));
        subdivisions += 1;
    }
    // Sum panel values in a fixed order for reproducibility.
    let mut panels: Vec<_> = heap.into_vec();
    panels.sort_by(|a, b| (a.piece, a.u0).partial_cmp(&(b.piece, b.u0)).unwrap());
    let mut out = [C::new(0.0, 0.0); N];
    for p in panels {
        for k in 0..N {
            out[k] += p.value[k];
        }
    }
    Ok(out)
}

/// Integrates a complex integrand along `path` to `spec.target_abs_tol`.
pub fn quad_path<F: Fn(C) -> C>(f: F, path: &Path, spec: &QuadratureSpec) -> Result<C> {
    quad_path_vec(|z| [f(z)], path, spec).map(|v| v[0])
}

/// Real integral of a real function over `[a, b]` (finite) or a ray when
/// `b` is infinite; a thin wrapper used by the real-axis integrals.
pub fn quad_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, decay_rate: f64, spec: &QuadratureSpec) -> Result<f64> {
    let g = |z: C| C::new(f(z.re), 0.0);
    let v = if b == f64::INFINITY {
        quad_path(g, &Path::ray(C::new(a, 0.0), C::new(1.0, 0.0), decay_rate), spec)?
    } else if a == f64::NEG_INFINITY {
        -quad_path(g, &Path::ray(C::new(b, 0.0), C::new(-1.0, 0.0), decay_rate), spec)?
    } else {
        quad_path(g, &Path::segment(C::new(a, 0.0), C::new(b, 0.0)), spec)?
    };
    Ok(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn gauss_rule_integrates_polynomials() {
        let s: f64 = gauss_legendre().iter().map(|&(x, w)| w * x.powi(28)).sum();
        assert!((s - 1.0 / 29.0).abs() < 1e-15);
        let total: f64 = gauss_legendre().iter().map(|&(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_sqrt_left() {
        let s = spec().with_singularity(EndpointSingularity::InverseSqrtLeft);
        let v = quad_path(|z| 1.0 / z.sqrt(), &Path::segment(C::new(0.0, 0.0), C::new(1.0, 0.0)), &s).unwrap();
        assert!((v - 2.0).norm() < 1e-12);
    }

    #[test]
    fn inverse_sqrt_both() {
        // ∫_{-1}^{1} dx/√(1-x²) = π
        let s = spec().with_singularity(EndpointSingularity::InverseSqrtBoth);
        let v = quad_path(|z| 1.0 / (1.0 - z * z).sqrt(), &Path::segment(C::new(-1.0, 0.0), C::new(1.0, 0.0)), &s)
            .unwrap();
        assert!((v - PI).norm() < 1e-12);
    }

    #[test]
    fn log_endpoint() {
        // ∫_0^1 ln x dx = -1
        let s = spec().with_singularity(EndpointSingularity::LogLeft);
        let v = quad_path(|z| z.ln(), &Path::segment(C::new(0.0, 0.0), C::new(1.0, 0.0)), &s).unwrap();
        assert!((v + 1.0).norm() < 1e-12);
        let s = spec().with_singularity(EndpointSingularity::LogRight);
        let v = quad_path(|z| (1.0 - z).ln(), &Path::segment(C::new(0.0, 0.0), C::new(1.0, 0.0)), &s).unwrap();
        assert!((v + 1.0).norm() < 1e-12);
    }

    #[test]
    fn residue_on_unit_circle() {
        let v = quad_path(|z| 1.0 / z, &Path::circle(C::new(0.0, 0.0), 1.0), &spec()).unwrap();
        assert!((v - C::new(0.0, 2.0 * PI)).norm() < 1e-13);
    }

    #[test]
    fn semi_infinite_arctan() {
        let v = quad_path(|z| 1.0 / (1.0 + z * z), &Path::ray(C::new(0.0, 0.0), C::new(1.0, 0.0), 2.0), &spec())
            .unwrap();
        assert!((v - 0.5 * PI).norm() < 1e-12);
        let r = quad_real(|x| 1.0 / (1.0 + x * x), f64::NEG_INFINITY, 0.0, 2.0, &spec()).unwrap();
        assert!((r - 0.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn stadium_is_counterclockwise() {
        let v = quad_path(|z| 1.0 / (z - 0.3), &Path::stadium(C::new(0.0, 0.0), C::new(1.0, 0.0), 0.2), &spec())
            .unwrap();
        assert!((v - C::new(0.0, 2.0 * PI)).norm() < 1e-12);
    }

    #[test]
    fn convergence_failure_reports_estimate() {
        let s = QuadratureSpec::new(1e-14, 3).unwrap();
        let err = quad_path(|z| 1.0 / z.sqrt(), &Path::segment(C::new(0.0, 0.0), C::new(1.0, 0.0)), &s).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
    }

    #[test]
    fn rejects_slow_decay() {
        assert!(quad_path(|z| 1.0 / z, &Path::ray(C::new(1.0, 0.0), C::new(1.0, 0.0), 1.0), &spec()).is_err());
    }
}
