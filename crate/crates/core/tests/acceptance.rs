//! Acceptance run: one line per criterion, `PASS`, `FAIL` or `DEVIATION`.
//!
//! `DEVIATION` marks a documented, unattainable sub-check; it is never
//! counted as a pass. The process exits with status 1 on any `FAIL`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::time::Instant;

use barrier_nls::cli::{s2_structure, validation_run, PatchSpec, RegionLabel, SolverOverrides};
use barrier_nls::genus0::{
    arctan_surrogate, genus0_state, gfun_g0_boundary, laplace_stencil, omega_phase, stationary_points_g0,
    wkb_laplace_residual, xi0_at_breaking, OmegaMethod,
};
use barrier_nls::genus1::{
    abel_map, alpha_from_m, char_speed, m_param, modulation_constants, period_integrals, psi_asy_g1, solve_endpoint,
};
use barrier_nls::nls_direct::{barrier_initial_data, evolve, evolve_from, SolverConfig};
use barrier_nls::phase_geometry::{first_breaking_time, rho1_real_roots, second_breaking_detail};
use barrier_nls::scattering::{
    connection_coefficient, eigenvalues, nu_branch, scattering_data, BarrierParams, BranchCut, Side,
};
use barrier_nls::specfun::{complete_elliptic, dilog, elliptic_e, quad_path, theta_sum, Path, QuadratureSpec};
use num_complex::Complex64 as C;
use rand::{rngs::StdRng, Rng, SeedableRng};

enum Outcome {
    Pass(String),
    Fail(String),
    Deviation(String),
}

type Check = Result<Outcome, String>;

/// Collects sub-check failures and deviations of one criterion.
#[derive(Default)]
struct Tally {
    fails: Vec<String>,
    deviations: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: String) {
        if !ok {
            self.fails.push(what);
        }
    }
    fn note(&mut self, s: String) {
        self.notes.push(s);
    }
    fn finish(self) -> Outcome {
        let notes = self.notes.join("; ");
        if !self.fails.is_empty() {
            Outcome::Fail(format!("{}; {notes}", self.fails.join("; ")))
        } else if !self.deviations.is_empty() {
            Outcome::Deviation(format!("{}; {notes}", self.deviations.join("; ")))
        } else {
            Outcome::Pass(notes)
        }
    }
}

fn e<T: std::fmt::Display>(v: T) -> String {
    v.to_string()
}

fn params(eps: f64) -> BarrierParams {
    BarrierParams::new(1.0, 1.0, eps).expect("valid parameters")
}

fn special_functions() -> Check {
    let mut t = Tally::default();
    let (k0, e0) = complete_elliptic(0.0).map_err(e)?;
    let e1 = elliptic_e(1.0).map_err(e)?;
    t.check((k0 - FRAC_PI_2).abs() < 1e-13 && (e0 - FRAC_PI_2).abs() < 1e-13, "K(0), E(0)".into());
    t.check((e1 - 1.0).abs() < 1e-13, "E(1)".into());
    let mut worst: f64 = 0.0;
    for &m in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        let (k, ee) = complete_elliptic(m).map_err(e)?;
        let (kp, ep) = complete_elliptic(1.0 - m).map_err(e)?;
        worst = worst.max((ee * kp + ep * k - k * kp - FRAC_PI_2).abs());
    }
    t.check(worst < 1e-11, format!("Legendre residual {worst:e}"));
    t.note(format!("Legendre max {worst:.1e}"));
    let l1 = (dilog(1.0).map_err(e)? - PI * PI / 6.0).abs();
    let lm1 = (dilog(-1.0).map_err(e)? + PI * PI / 12.0).abs();
    t.check(l1 < 1e-12 && lm1 < 1e-12, format!("Li2 errors {l1:e}, {lm1:e}"));
    let mut rng = StdRng::seed_from_u64(20261014);
    let mut worst_theta: f64 = 0.0;
    for _ in 0..10 {
        let h = rng.random_range(-4.0..-0.5);
        let w = C::new(rng.random_range(-1.0..1.0), rng.random_range(-PI..PI));
        let th = theta_sum(w, h).map_err(e)?;
        let th_i = theta_sum(w + C::new(0.0, 2.0 * PI), h).map_err(e)?;
        let th_h = theta_sum(w + h, h).map_err(e)?;
        let scale = th.norm().max(1.0);
        worst_theta = worst_theta.max((th_i - th).norm() / scale);
        worst_theta = worst_theta.max((th_h - (-0.5 * h - w).exp() * th).norm() / scale);
    }
    t.check(worst_theta < 1e-12, format!("theta automorphy {worst_theta:e}"));
    t.note(format!("theta max {worst_theta:.1e}"));
    Ok(t.finish())
}

fn scattering() -> Check {
    let mut t = Tally::default();
    let p = params(0.05);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let z = -10.0 + 20.0 * i as f64 / 999.0;
        let s = scattering_data(C::new(z, 0.0), &p).map_err(e)?;
        worst = worst.max((s.a.norm_sqr() + s.b.norm_sqr() - 1.0).abs());
    }
    t.check(worst < 1e-12, format!("unitarity {worst:e}"));
    t.note(format!("unitarity {worst:.1e}"));
    // The closed form with ν from two different cuts gives the same r.
    let curved = BranchCut::curved(
        vec![C::new(0.0, -1.0), C::new(0.6, -0.5), C::new(0.8, 0.0), C::new(0.6, 0.5), C::new(0.0, 1.0)],
        1.0,
    )
    .map_err(e)?;
    let mut worst_cut: f64 = 0.0;
    for &z in &[C::new(0.3, 0.2), C::new(0.5, -0.1), C::new(-0.4, 0.6), C::new(1.5, 0.1), C::new(0.2, 0.9)] {
        let closed = |nu: C| {
            let phi = nu * (2.0 * p.l() / p.eps());
            let a = (nu * phi.cos() - C::i() * z * phi.sin()) / nu * (C::i() * z * (2.0 * p.l() / p.eps())).exp();
            -(phi.sin() / nu) * p.q() / a
        };
        let r1 = closed(nu_branch(z, 1.0, &BranchCut::ImaginarySegment).map_err(e)?);
        let r2 = closed(nu_branch(z, 1.0, &curved).map_err(e)?);
        let r = scattering_data(z, &p).map_err(e)?.r;
        worst_cut = worst_cut.max((r1 - r2).norm() / r.norm()).max((r1 - r).norm() / r.norm());
    }
    t.check(worst_cut < 1e-13, format!("cut dependence {worst_cut:e}"));
    for &eps in &[0.2, 0.1, 0.05] {
        let p = params(eps);
        let n = eigenvalues(&p).map_err(e)?.len() as f64;
        let target = 2.0 * p.l() * p.q() / (PI * eps);
        t.check((n - target).abs() <= 1.0, format!("eigenvalue count {n} vs {target} at eps = {eps}"));
        t.note(format!("N({eps}) = {n}"));
    }
    let ys = eigenvalues(&p).map_err(e)?;
    let spec = QuadratureSpec::default();
    let mut worst_res: f64 = 0.0;
    for (i, &y) in ys.iter().enumerate() {
        let zk = C::new(0.0, y);
        let ck = connection_coefficient(zk, &p).map_err(e)?;
        let mut gap = y.min(1.0 - y);
        if i > 0 {
            gap = gap.min(y - ys[i - 1]);
        }
        if i + 1 < ys.len() {
            gap = gap.min(ys[i + 1] - y);
        }
        let circle_spec = spec.with_tol(1e-11 * ck.norm());
        let res = quad_path(|z| scattering_data(z, &p).map(|s| s.r).unwrap_or(C::new(f64::NAN, 0.0)), &Path::circle(zk, 0.3 * gap), &circle_spec)
            .map_err(e)?
            / (2.0 * PI * C::i());
        worst_res = worst_res.max((res - ck).norm() / ck.norm().max(1.0));
    }
    t.check(worst_res < 1e-8, format!("connection vs residue {worst_res:e}"));
    t.note(format!("residue oracle {worst_res:.1e} over {} eigenvalues", ys.len()));
    Ok(t.finish())
}

fn genus0() -> Check {
    let mut t = Tally::default();
    let p = params(0.05);
    let quad = QuadratureSpec::default();
    let st = genus0_state(0.2, 0.15, &p, &quad).map_err(e)?;
    let mut worst_band: f64 = 0.0;
    for &z in &st.band.points[1..st.band.points.len() - 1] {
        let (_, phi0, _) = gfun_g0_boundary(z, 0.2, 0.15, &p, &st.cut, Side::Plus).map_err(e)?;
        worst_band = worst_band.max(phi0.im.abs());
    }
    t.check(worst_band < 1e-9, format!("band Im phi0 {worst_band:e}"));
    let samples = [
        (0.0, 0.05),
        (0.0, 0.3),
        (0.1, 0.2),
        (-0.2, 0.15),
        (0.3, 0.1),
        (0.45, 0.18),
        (-0.6, 0.12),
        (0.7, 0.08),
        (0.85, 0.04),
        (-0.9, 0.02),
    ];
    let mut worst_omega: f64 = 0.0;
    for &(x, tt) in &samples {
        let a = omega_phase(x, tt, &p, &quad, OmegaMethod::Integral).map_err(e)?;
        let b = omega_phase(x, tt, &p, &quad, OmegaMethod::Dilog).map_err(e)?;
        worst_omega = worst_omega.max((a - b).abs());
    }
    t.check(worst_omega < 1e-8, format!("omega forms {worst_omega:e}"));
    t.note(format!("omega forms {worst_omega:.1e}"));
    let mut worst_xi: f64 = 0.0;
    for &x in &[0.1, 0.25, 0.5, 0.75, 0.9] {
        worst_xi = worst_xi.max((xi0_at_breaking(x, &p).map_err(e)? - p.q() / SQRT_2).abs());
        let t1 = first_breaking_time(x, &p).map_err(e)?;
        let _ = stationary_points_g0(x, 0.99 * t1, &p).map_err(e)?;
    }
    t.check(worst_xi < 1e-8, format!("xi0(T1) {worst_xi:e}"));
    let (x, tt) = (0.2, 0.15);
    let r1 = wkb_laplace_residual(x, tt, &p, 1e-3).map_err(e)?;
    let r2 = wkb_laplace_residual(x, tt, &p, 5e-4).map_err(e)?;
    let rel = ((r1 - r2) / r2).abs();
    t.check(r2.abs() > 1e-3 && rel < 0.1, format!("Laplace residual {r2:e}, Richardson change {rel:e}"));
    let s = laplace_stencil(|xs, ts| Ok(arctan_surrogate(xs, ts, p.l(), 0.3, 0.7, p.q())), x, tt, p.q(), 1e-3).map_err(e)?;
    t.check(s.abs() < 1e-6, format!("arctan surrogate {s:e}"));
    t.note(format!("Laplace residual {r2:.4e} (change {rel:.1e}), surrogate {s:.1e}"));
    Ok(t.finish())
}

fn endpoint() -> Check {
    let mut t = Tally::default();
    let q = 1.0;
    let mut worst: f64 = 0.0;
    for k in 1..=10 {
        let mu = SQRT_2 * q * k as f64 / 11.0;
        let s = solve_endpoint(mu, q).map_err(e)?;
        worst = worst.max(s.res_moment.max(s.res_gap) / (q * q));
    }
    t.check(worst < 1e-10, format!("residuals {worst:e}"));
    t.note(format!("max residual {worst:.1e}"));
    let a0 = solve_endpoint(0.01 * SQRT_2 * q, q).map_err(e)?.alpha;
    let a1 = solve_endpoint(0.999 * SQRT_2 * q, q).map_err(e)?.alpha;
    let d0 = (a0 - C::new(0.0, q)).norm();
    let d1 = (a1 - C::new(q / SQRT_2, 0.0)).norm();
    t.check(d0 < 0.05 * q && d1 < 0.05 * q, format!("limits {d0:e}, {d1:e}"));
    t.note(format!("limit distances {d0:.2e}, {d1:.2e}"));
    let mut worst_rt: f64 = 0.0;
    for &m in &[0.05, 0.2, 0.5, 0.8, 0.95] {
        let a = alpha_from_m(m, q).map_err(e)?;
        worst_rt = worst_rt.max((m_param(a, q) - m).abs());
    }
    t.check(worst_rt < 1e-10, format!("round trip {worst_rt:e}"));
    Ok(t.finish())
}

fn periods_and_constants() -> Check {
    let mut t = Tally::default();
    let p = params(0.05);
    let quad = QuadratureSpec::default();
    for &(x, tt) in &[(0.25, 0.4), (0.1, 0.36), (0.6, 0.2)] {
        let st = solve_endpoint((p.l() - x) / (2.0 * tt), p.q()).map_err(e)?;
        let pd = period_integrals(st.alpha, p.q(), &quad).map_err(e)?;
        let (k, _) = complete_elliptic(st.m).map_err(e)?;
        let expected = C::new(0.0, 2.0 * k / (st.alpha + C::new(0.0, p.q())).norm());
        let dg = (pd.gap_integral - expected).norm();
        t.check(dg < 1e-8, format!("gap integral {dg:e} at ({x}, {tt})"));
        t.check(pd.h < 0.0 && pd.h_imag.abs() < 1e-9, format!("H = {} + {}i", pd.h, pd.h_imag));
        let m = modulation_constants(st.alpha, x, tt, &p, &quad).map_err(e)?;
        let db = (m.tau1_b_period + m.omega).norm();
        t.check(db < 1e-8, format!("tau1 b-period {db:e}"));
        let im = m.imag_parts.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
        t.check(im < 1e-8, format!("imaginary parts {im:e}"));
        let a_iq = abel_map(C::new(0.0, p.q()), st.alpha, pd.c_nu, p.q(), &quad).map_err(e)?;
        let a_star = abel_map(st.alpha.conj(), st.alpha, pd.c_nu, p.q(), &quad).map_err(e)?;
        let da = a_iq.norm().max((a_star - C::new(pd.h / 2.0, PI)).norm());
        t.check(da < 1e-8, format!("Abel anchors {da:e}"));
        t.note(format!("({x},{tt}): gap {dg:.0e} tau {db:.0e} Im {im:.0e} Abel {da:.0e}"));
    }
    Ok(t.finish())
}

fn whitham() -> Check {
    let mut t = Tally::default();
    let q = 1.0;
    let h = 1e-4;
    let alpha = |x: f64, tt: f64| solve_endpoint((1.0 - x) / (2.0 * tt), q).map(|s| s.alpha);
    let mut worst: f64 = 0.0;
    for &(x, tt) in &[(0.25, 0.3), (0.25, 0.4), (0.5, 0.25), (0.5, 0.45), (0.75, 0.2)] {
        let da_t = (alpha(x, tt + h).map_err(e)? - alpha(x, tt - h).map_err(e)?) / (2.0 * h);
        let da_x = (alpha(x + h, tt).map_err(e)? - alpha(x - h, tt).map_err(e)?) / (2.0 * h);
        let c = char_speed(alpha(x, tt).map_err(e)?, q).map_err(e)?;
        let r = (da_t + c * da_x).norm() / da_x.norm();
        worst = worst.max(r);
    }
    t.check(worst < 1e-4, format!("Whitham residual {worst:e}"));
    t.note(format!("max relative residual {worst:.1e}"));
    Ok(t.finish())
}

fn breaking_curves() -> Check {
    let mut t = Tally::default();
    let p = params(0.05);
    for &x in &[0.0, 0.25, 0.5, 0.75] {
        let t1 = first_breaking_time(x, &p).map_err(e)?;
        let sb = second_breaking_detail(x, &p, 1e-12).map_err(e)?;
        t.check(sb.residual_rho < 1e-8 && sb.residual_drho < 1e-8, format!("double-root residuals at x = {x}"));
        if x == 0.0 {
            if sb.t2 == t1 {
                t.deviations.push("x = 0: T2 = T1 exactly (strict T2 > T1 is unattainable, genus-one region empty)".into());
            } else {
                t.check(sb.t2 > t1, format!("T2 <= T1 at x = {x}"));
            }
            continue;
        }
        t.check(sb.t2 > t1, format!("T2 <= T1 at x = {x}"));
        let count = |tt: f64| -> Result<usize, String> {
            let st = solve_endpoint((p.l() - x) / (2.0 * tt), p.q()).map_err(e)?;
            Ok(rho1_real_roots(st.alpha, (p.l() - x) / (2.0 * tt) - st.alpha.re, tt, p.l(), p.q()).map_err(e)?.roots.len())
        };
        let (before, after) = (count(sb.t2 - 1e-3)?, count(sb.t2 + 1e-3)?);
        t.check(before == 2 && after == 0, format!("root count {before} -> {after} at x = {x}"));
        t.note(format!("T2({x}) = {:.7}", sb.t2));
    }
    Ok(t.finish())
}

fn pde_oracle() -> Check {
    let mut t = Tally::default();
    let p = params(0.1);
    let cfg = SolverConfig::desk(p, 0.1, vec![0.05]).map_err(e)?;
    let plane = evolve_from(&cfg, vec![C::new(p.q(), 0.0); cfg.grid_points()]).map_err(e)?;
    let mut worst: f64 = 0.0;
    for s in &plane {
        let exact = C::from_polar(p.q(), p.q() * p.q() * s.t / p.eps());
        worst = worst.max(s.values.iter().map(|v| (v - exact).norm()).fold(0.0, f64::max));
    }
    t.check(worst < 1e-10, format!("plane wave {worst:e}"));
    let init = barrier_initial_data(&cfg);
    let n0 = (init.iter().map(|v| v.norm_sqr()).sum::<f64>() * cfg.dx()).sqrt();
    let snaps = evolve(&cfg).map_err(e)?;
    let last = snaps.last().ok_or("no snapshot")?;
    let drift = ((last.l2_norm() - n0) / n0).abs();
    t.check(drift < 1e-10, format!("norm drift {drift:e}"));
    let n = cfg.grid_points();
    let parity = (1..n).map(|j| (last.values[j] - last.values[n - j]).norm()).fold(0.0, f64::max);
    t.check(parity < 1e-10, format!("parity {parity:e}"));
    // 10⁴ steps on a coarser grid.
    let small = SolverConfig::new(p, 4.0, 1 << 11, 1e-5, 0.1, vec![]).map_err(e)?;
    let sn = evolve(&small).map_err(e)?;
    let n_small = (barrier_initial_data(&small).iter().map(|v| v.norm_sqr()).sum::<f64>() * small.dx()).sqrt();
    let drift_long = ((sn[0].l2_norm() - n_small) / n_small).abs();
    t.check(drift_long < 1e-10, format!("norm drift over 1e4 steps {drift_long:e}"));
    t.note(format!("plane {worst:.1e}, drift {drift:.1e} / {drift_long:.1e} (1e4 steps), parity {parity:.1e}"));
    Ok(t.finish())
}

fn solver_vs_asymptotics() -> Result<(Outcome, Outcome), String> {
    let base = params(0.05);
    let quad = QuadratureSpec::default();
    let patches = [
        PatchSpec { t: 0.15, region: RegionLabel::S1, x_lo: -0.5, x_hi: 0.5 },
        PatchSpec { t: 0.2, region: RegionLabel::S0, x_lo: 1.5, x_hi: 2.0 },
    ];
    let recs = validation_run(&base, &[0.05, 0.025], &patches, &SolverOverrides::default(), &quad).map_err(e)?;
    let get = |eps: f64, r: RegionLabel| recs.iter().find(|v| v.eps == eps && v.region == r).map(|v| v.linf).ok_or("missing record");
    let (a, b) = (get(0.05, RegionLabel::S1)?, get(0.025, RegionLabel::S1)?);
    let mut t9 = Tally::default();
    t9.check(a <= 0.2 * base.q(), format!("e(0.05) = {a:e}"));
    t9.check(b / a <= 0.9, format!("ratio {:e}", b / a));
    t9.note(format!("e(0.05) = {a:.4}, e(0.025) = {b:.4}, ratio {:.3}", b / a));
    let (c, d) = (get(0.05, RegionLabel::S0)?, get(0.025, RegionLabel::S0)?);
    let mut t10 = Tally::default();
    t10.check(c <= 0.15 * base.q(), format!("max |psi| = {c:e} at eps = 0.05"));
    t10.check(d < c, format!("not decreasing: {c:e} -> {d:e}"));
    t10.note(format!("max |psi| {c:.4} (0.05) -> {d:.4} (0.025)"));
    Ok((t9.finish(), t10.finish()))
}

fn s2_structure_check() -> Check {
    let mut t = Tally::default();
    let p = params(0.05);
    let quad = QuadratureSpec::default();
    let (x, tt) = (0.25, 0.4);
    let st = solve_endpoint((p.l() - x) / (2.0 * tt), p.q()).map_err(e)?;
    let m = modulation_constants(st.alpha, x, tt, &p, &quad).map_err(e)?;
    let psi = psi_asy_g1(x, tt, &p, &st, &m).map_err(e)?;
    let mut shifted = m;
    shifted.omega += 2.0 * PI * p.eps();
    let dp = (psi_asy_g1(x, tt, &p, &st, &shifted).map_err(e)? - psi).norm();
    t.check(dp < 1e-10, format!("periodicity {dp:e}"));
    let top = solve_endpoint(0.999 * SQRT_2 * p.q(), p.q()).map_err(e)?;
    let amp_gap = top.alpha.im;
    t.check(amp_gap < 0.05 * p.q(), format!("prefactor gap {amp_gap:e}"));
    let t1 = first_breaking_time(x, &p).map_err(e)?;
    let t2 = second_breaking_detail(x, &p, 1e-12).map_err(e)?.t2;
    let s = s2_structure(x, (1.05 * t1, 0.95 * t2), 301, 0.1 * p.q(), &p, &SolverOverrides::default(), &quad).map_err(e)?;
    let rel = (s.counted_extrema as f64 - s.predicted_extrema).abs() / s.predicted_extrema;
    t.check(rel <= 0.3, format!("extrema {} vs predicted {:.3}", s.counted_extrema, s.predicted_extrema));
    t.note(format!(
        "periodicity {dp:.0e}, q - Im alpha = {:.4}, extrema {} vs predicted {:.3} (phase increment {:.3})",
        p.q() - amp_gap,
        s.counted_extrema,
        s.predicted_extrema,
        s.phase_increment
    ));
    Ok(t.finish())
}

fn main() {
    let criteria: Vec<(&str, Box<dyn Fn() -> Check>)> = vec![
        ("1 special functions", Box::new(special_functions)),
        ("2 scattering", Box::new(scattering)),
        ("3 genus-0", Box::new(genus0)),
        ("4 genus-1 endpoint", Box::new(endpoint)),
        ("5 periods and constants", Box::new(periods_and_constants)),
        ("6 Whitham", Box::new(whitham)),
        ("7 breaking curves", Box::new(breaking_curves)),
        ("8 PDE oracle", Box::new(pde_oracle)),
    ];
    let mut failed = 0;
    let mut report = |name: &str, out: Result<Outcome, String>, secs: f64| {
        let (tag, detail) = match out {
            Ok(Outcome::Pass(d)) => ("PASS", d),
            Ok(Outcome::Deviation(d)) => ("DEVIATION", d),
            Ok(Outcome::Fail(d)) => ("FAIL", d),
            Err(d) => ("FAIL", format!("error: {d}")),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("[{tag}] criterion {name} ({secs:.1} s): {detail}");
    };
    for (name, f) in &criteria {
        let start = Instant::now();
        let out = f();
        report(name, out, start.elapsed().as_secs_f64());
    }
    let start = Instant::now();
    match solver_vs_asymptotics() {
        Ok((a, b)) => {
            let secs = start.elapsed().as_secs_f64();
            report("9 solver vs asymptotics in S1", Ok(a), secs);
            report("10 solver decay in S0", Ok(b), secs);
        }
        Err(d) => {
            let secs = start.elapsed().as_secs_f64();
            report("9 solver vs asymptotics in S1", Err(d.clone()), secs);
            report("10 solver decay in S0", Err(d), secs);
        }
    }
    let start = Instant::now();
    let out = s2_structure_check();
    report("11 S2 structure", out, start.elapsed().as_secs_f64());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
