//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test --test acceptance`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use fbms_core::certify::{certify_sandwich, index_2d_operator};
use fbms_core::closed_form::{
    apply_a, apply_l, boundary_quotient, closed_form_index, closed_form_spectrum, ladder_apply,
    LadderDirection, ModeProfile,
};
use fbms_core::discrete::{assemble, CoefficientField, DiscreteOperator, Resolution};
use fbms_core::geometry::{
    make_critical_catenoid, make_equatorial_disk, solve_critical_t, BoundaryComponent,
    CatenoidParams, Vec3, CRITICAL_BRACKET,
};
use fbms_core::mode1d::{
    assemble_fixed_spectrum, assemble_full_spectrum, mode_1d_index, Mode1dMethod,
};
use fbms_core::report::Parity;
use fbms_core::sampled::{SampledFunction, UniformGrid};
use fbms_core::spectral::{fixed_spectrum, observed_order, richardson_by_rank, spectra_2d};
use fbms_core::tolerance::ToleranceProfile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FINE: usize = 128;
const COARSE: usize = 64;

struct Ledger {
    failures: usize,
}

impl Ledger {
    fn record(&mut self, id: &str, pass: bool, detail: String) {
        println!(
            "{} criterion {id}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            self.failures += 1;
        }
    }

    fn check(&mut self, id: &str, f: impl FnOnce() -> Result<(bool, String), String>) {
        match f() {
            Ok((pass, detail)) => self.record(id, pass, detail),
            Err(e) => self.record(id, false, format!("error: {e}")),
        }
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn ball_operator(
    chart_is_disk: bool,
    n: usize,
    tol: &ToleranceProfile,
) -> Result<DiscreteOperator, String> {
    let chart = if chart_is_disk {
        make_equatorial_disk()
    } else {
        make_critical_catenoid()
    };
    assemble(
        &chart,
        &CoefficientField::ball(),
        Resolution::square(n),
        tol,
    )
    .map_err(e)
}

fn criterion_1() -> Result<(bool, String), String> {
    let start = Instant::now();
    let t = solve_critical_t(CRITICAL_BRACKET.0, CRITICAL_BRACKET.1, 1e-14).map_err(e)?;
    let elapsed = start.elapsed();
    let sig5 = format!("{t:.5}") == "1.19968" || (t - 1.19968).abs() < 5e-6;
    let quoted = [(t.cosh(), 1.81), (t.sinh(), 1.51), (t.tanh(), 0.83)];
    let two_dec = quoted.iter().all(|(v, q)| (v - q).abs() < 5e-3);
    let pass = sig5 && two_dec && elapsed < Duration::from_millis(1);
    Ok((
        pass,
        format!(
            "T = {t:.12}, cosh {:.4}, sinh {:.4}, tanh {:.4}, {:.3} ms",
            quoted[0].0,
            quoted[1].0,
            quoted[2].0,
            ms(elapsed)
        ),
    ))
}

fn criterion_2() -> Result<(bool, String), String> {
    let start = Instant::now();
    let p = CatenoidParams::critical();
    let spec = closed_form_spectrum(p, 50);
    let quotient = boundary_quotient(ModeProfile::SinhPlusTSech, p.half_height);
    let elapsed = start.elapsed();
    let t = p.half_height;
    let n0: Vec<f64> = spec.iter().filter(|m| m.n == 0).map(|m| m.delta).collect();
    let n0_ok = n0.len() == 1 && (n0[0] - 1.0 / t.sinh().powi(2)).abs() < 1e-12 && n0[0] < 1.0;
    let n1 = |parity: Parity| spec.iter().find(|m| m.n == 1 && m.parity == parity);
    let minus =
        n1(Parity::Even).is_some_and(|m| (m.delta + 1.0).abs() < 1e-12 && m.multiplicity == 2);
    let plus =
        n1(Parity::Odd).is_some_and(|m| (m.delta - 1.0).abs() < 1e-10 && m.multiplicity == 2);
    let quotient_ok = (quotient - 1.0).abs() < 1e-10;
    let high = spec.iter().filter(|m| m.n >= 2);
    let high_count = high.clone().count();
    let high_min = high.map(|m| m.delta).fold(f64::INFINITY, f64::min);
    let pass = n0_ok
        && minus
        && plus
        && quotient_ok
        && high_count == 2 * 49
        && high_min > 1.0
        && elapsed < Duration::from_millis(10);
    Ok((
        pass,
        format!(
            "n=0 delta {:.12}, n=1 -1 x2 {minus}, +1 x2 {plus} (quotient - 1 = {:.1e}), n=2..50 min {high_min:.6} over {high_count} branches, {:.3} ms",
            n0.first().copied().unwrap_or(f64::NAN),
            quotient - 1.0,
            ms(elapsed)
        ),
    ))
}

fn main() {
    let tol = ToleranceProfile::default();
    let mut ledger = Ledger { failures: 0 };
    let t = CatenoidParams::critical().half_height;

    ledger.check("1 (critical half-height)", criterion_1);
    ledger.check("2 (closed-form spectrum)", criterion_2);

    // Shared 128x128 catenoid run.
    let start = Instant::now();
    let cat_op = ball_operator(false, FINE, &tol);
    let cat = cat_op
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|op| index_2d_operator(op, None, &tol).map_err(e));
    let cat_time = start.elapsed();

    ledger.check("3 (index 4, nullity 3 from three pipelines)", || {
        let cf = closed_form_index(&tol).map_err(e)?;
        let shoot = mode_1d_index(
            CatenoidParams::critical(),
            8,
            Mode1dMethod::Shooting,
            1024,
            1.0,
            &tol,
        )
        .map_err(e)?;
        let full = &cat.as_ref().map_err(Clone::clone)?.certificate;
        let want = (0, 1, 3, 2);
        let all = [&cf, &shoot, full];
        let pass = all
            .iter()
            .all(|c| c.counts.as_tuple() == want && c.index == 4 && c.nullity == 3)
            && cat_time < Duration::from_secs(60);
        let summary: Vec<String> = all
            .iter()
            .map(|c| {
                format!(
                    "{} {:?} -> ({}, {})",
                    c.method,
                    c.counts.as_tuple(),
                    c.index,
                    c.nullity
                )
            })
            .collect();
        Ok((
            pass,
            format!("{}; 2D {:.1} s", summary.join("; "), cat_time.as_secs_f64()),
        ))
    });

    ledger.check("4 (equatorial disk)", || {
        let disk = ball_operator(true, FINE, &tol)?;
        let cert = index_2d_operator(&disk, None, &tol).map_err(e)?.certificate;
        let lap = assemble(
            &make_equatorial_disk(),
            &CoefficientField::laplace(),
            Resolution::square(FINE),
            &tol,
        )
        .map_err(e)?;
        let steklov = spectra_2d(&lap, 5, &tol).map_err(e)?.dtn_report.eigenvalues;
        let exact = [0.0, 1.0, 1.0, 2.0, 2.0];
        let err = steklov
            .iter()
            .zip(exact)
            .map(|(v, x)| (v - x).abs())
            .fold(0.0, f64::max);
        let pass = cert.index == 1 && steklov.len() >= 5 && err <= 1e-2;
        Ok((
            pass,
            format!(
                "index {}, Steklov {:?}, max error {err:.2e}",
                cert.index,
                &steklov[..5.min(steklov.len())]
            ),
        ))
    });

    ledger.check("5 (S(nu_a, nu_a) = -2 int nu_a^2)", || {
        let op = cat_op.as_ref().map_err(Clone::clone)?;
        let mut worst = 0.0f64;
        let mut parts = Vec::new();
        for a in [Vec3::x(), Vec3::y(), Vec3::z()] {
            let nu_a = op.sample_geometry(|pg| pg.nu.dot(&a), &tol).map_err(e)?;
            let s = op.bilinear_s(&nu_a, &nu_a).map_err(e)?;
            let area = op.m.form(&nu_a, &nu_a);
            let rel = (s + 2.0 * area).abs() / s.abs();
            worst = worst.max(rel);
            parts.push(format!("{rel:.2e}"));
        }
        Ok((
            worst <= 1e-3,
            format!("relative defects e1..e3: {}", parts.join(", ")),
        ))
    });

    ledger.check("6 (first Jacobi-Steklov eigenvalue)", || {
        let first_cat = cat.as_ref().map_err(Clone::clone)?.dtn_report.eigenvalues[0];
        let disk = ball_operator(true, FINE, &tol)?;
        let first_disk = spectra_2d(&disk, 1, &tol)
            .map_err(e)?
            .dtn_report
            .eigenvalues[0];
        let pass = (first_cat + 1.0).abs() <= 1e-3 && first_disk.abs() <= 1e-3;
        Ok((
            pass,
            format!("catenoid {first_cat:.6}, disk {first_disk:.2e}"),
        ))
    });

    ledger.check("7 (fixed-boundary kernel and gap)", || {
        let full = &cat.as_ref().map_err(Clone::clone)?.fixed;
        let mut lambda1 = Vec::new();
        for n in [32usize, COARSE] {
            let op = ball_operator(false, n, &tol)?;
            let s = fixed_spectrum(&op, 2, tol.grid_2d_cuts(n, n)).map_err(e)?;
            lambda1.push(s.values[0]);
        }
        lambda1.push(full.values[0]);
        let order = observed_order(lambda1[1], lambda1[2]);
        let lambda2 = full.values[1];
        let oracle = assemble_fixed_spectrum(8, CatenoidParams::critical(), 3, 1024, &tol).map_err(e)?;
        let oracle2 = oracle.eigenvalues[1];
        let pass = order >= 1.8 && lambda2 > 0.3 && oracle2 > 0.3 && (lambda2 - oracle2).abs() <= 1e-2 * oracle2;
        Ok((
            pass,
            format!(
                "lambda1 at 32/64/128: {:.3e} {:.3e} {:.3e}, order {order:.2}; lambda2 {lambda2:.6} vs 1D oracle {oracle2:.6}",
                lambda1[0], lambda1[1], lambda1[2]
            ),
        ))
    });

    ledger.check("8 (at least three Jacobi-Steklov values below 1)", || {
        let values = &cat.as_ref().map_err(Clone::clone)?.dtn_report.eigenvalues;
        // Counted strictly below the band around 1.
        let band = tol.grid_2d_cuts(FINE, FINE).cluster_tol;
        let below = values.iter().filter(|&&v| v < 1.0 - band).count();
        Ok((below >= 3, format!("{below} values below 1 - {band:.0e}")))
    });

    ledger.check("9 (2D vs 1D shooting vs closed form, n <= 8)", || {
        let p = CatenoidParams::critical();
        let shooting = assemble_full_spectrum(8, p, Mode1dMethod::Shooting, &tol).map_err(e)?.eigenvalues;
        let closed: Vec<f64> = {
            let mut v: Vec<f64> = closed_form_spectrum(p, 8)
                .iter()
                .flat_map(|m| std::iter::repeat_n(m.delta, m.multiplicity))
                .collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let err_1d = shooting
            .iter()
            .zip(&closed)
            .map(|(s, c)| (s - c).abs() / c.abs())
            .fold(0.0, f64::max);
        let fine = cat.as_ref().map_err(Clone::clone)?.dtn.eigen().map_err(e)?.values;
        let coarse_op = ball_operator(false, COARSE, &tol)?;
        let coarse = spectra_2d(&coarse_op, 1, &tol).map_err(e)?.dtn.eigen().map_err(e)?.values;
        let m = shooting.len();
        let extrapolated = richardson_by_rank(&coarse[..m], &fine[..m]);
        let rel = |a: &[f64]| {
            a.iter()
                .zip(&shooting)
                .map(|(v, s)| (v - s).abs() / s.abs())
                .fold(0.0, f64::max)
        };
        let err_2d = rel(&extrapolated);
        let raw = rel(&fine[..m]);
        let pass = shooting.len() == closed.len() && err_2d <= 1e-3 && err_1d <= 1e-8;
        Ok((
            pass,
            format!(
                "{m} values; 2D (Richardson 64/128) vs shooting {err_2d:.2e} (raw 128: {raw:.2e}); shooting vs closed form {err_1d:.2e}"
            ),
        ))
    });

    ledger.check("10 (ladder intertwining L_k D- = D- A_k)", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1add_e4);
        let mut ratios = Vec::new();
        for _ in 0..20 {
            let k = rng.gen_range(0.0..16.0);
            let terms: Vec<(f64, f64, f64)> = (0..3)
                .map(|_| {
                    (
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(0.5..3.0),
                        rng.gen_range(0.0..2.0 * PI),
                    )
                })
                .collect();
            let u = |s: f64| {
                terms
                    .iter()
                    .map(|(a, b, c)| a * (b * s + c).sin())
                    .sum::<f64>()
            };
            let mut errs = Vec::new();
            for points in [257usize, 513] {
                let f = SampledFunction::from_fn(UniformGrid::new(-t, t, points), u);
                let lhs =
                    apply_l(k, &ladder_apply(LadderDirection::Minus, &f).map_err(e)?).map_err(e)?;
                let rhs =
                    ladder_apply(LadderDirection::Minus, &apply_a(k, &f).map_err(e)?).map_err(e)?;
                let r = lhs.axpy(-1.0, &rhs);
                // Away from the one-sided end stencils.
                let err = r
                    .grid
                    .nodes()
                    .zip(&r.values)
                    .filter(|(s, _)| s.abs() <= 0.9 * t)
                    .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
                errs.push(err);
            }
            ratios.push(errs[0] / errs[1]);
        }
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        Ok((
            lo >= 3.5 && hi <= 4.5,
            format!("20 random functions, step-halving ratio in [{lo:.3}, {hi:.3}]"),
        ))
    });

    ledger.check("11 (sandwich bounds, perturbed boundary curvature)", || {
        let kappa = |_: BoundaryComponent, th: f64| 1.0 + 0.1 * th.sin();
        let s = certify_sandwich(
            &make_critical_catenoid(),
            &kappa,
            Resolution::square(FINE),
            &tol,
        )
        .map_err(e)?;
        let pass = s.lower.index <= 4 && 4 <= s.upper.index;
        Ok((
            pass,
            format!(
                "alpha in [{:.3}, {:.3}], lower {:?} index {}, upper {:?} index {}",
                s.alpha_inf,
                s.alpha_sup,
                s.lower.counts.as_tuple(),
                s.lower.index,
                s.upper.counts.as_tuple(),
                s.upper.index
            ),
        ))
    });

    println!("{} of 11 criteria failed", ledger.failures);
    if ledger.failures > 0 {
        std::process::exit(1);
    }
}
