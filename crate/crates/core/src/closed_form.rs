//! Closed-form Jacobi-Steklov spectrum of the critical catenoid.
//!
//! Separating `u = f(t) g(theta)` reduces the Jacobi-Steklov problem to
//! `f'' + (2/cosh^2 t - n^2) f = 0` on `[-T, T]` with `T f'(T) = delta f(T)`
//! and `-T f'(-T) = delta f(-T)`. The ladder operators
//! `D+- = d/dt +- tanh t` give every kernel element explicitly, so each
//! mode contributes two profiles of definite parity.

use serde::{Deserialize, Serialize};

use crate::certify::{IndexCertificate, IndexCounts};
use crate::error::{FbmsError, Result};
use crate::geometry::CatenoidParams;
use crate::report::{sort_mode_rows, ModeLabel, ModeRow, Parity, SpectrumKind, SpectrumReport};
use crate::sampled::SampledFunction;
use crate::tolerance::ToleranceProfile;

/// Radial factors of the separated Jacobi fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModeProfile {
    /// `tanh t` (n = 0, odd).
    Tanh,
    /// `1 - t tanh t` (n = 0, even); the profile of `zeta`.
    SupportProfile,
    /// `1 / cosh t` (n = 1, even).
    Sech,
    /// `sinh t + t / cosh t` (n = 1, odd).
    SinhPlusTSech,
    /// `(n - tanh t) e^{nt} +- (n + tanh t) e^{-nt}` (n >= 2).
    Exponential { n: u32, parity: Parity },
}

impl ModeProfile {
    pub fn mode(&self) -> u32 {
        match *self {
            ModeProfile::Tanh | ModeProfile::SupportProfile => 0,
            ModeProfile::Sech | ModeProfile::SinhPlusTSech => 1,
            ModeProfile::Exponential { n, .. } => n,
        }
    }

    pub fn parity(&self) -> Parity {
        match *self {
            ModeProfile::Tanh | ModeProfile::SinhPlusTSech => Parity::Odd,
            ModeProfile::SupportProfile | ModeProfile::Sech => Parity::Even,
            ModeProfile::Exponential { parity, .. } => parity,
        }
    }

    /// `(f, f', f'')` at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let th = t.tanh();
        let sech = 1.0 / t.cosh();
        let sech2 = sech * sech;
        match *self {
            ModeProfile::Tanh => (th, sech2, -2.0 * sech2 * th),
            ModeProfile::SupportProfile => {
                let f = 1.0 - t * th;
                let d = -th - t * sech2;
                let dd = -2.0 * sech2 + 2.0 * t * sech2 * th;
                (f, d, dd)
            }
            ModeProfile::Sech => (sech, -sech * th, sech * (th * th - sech2)),
            ModeProfile::SinhPlusTSech => {
                let f = t.sinh() + t * sech;
                let d = t.cosh() + sech - t * sech * th;
                let dd = t.sinh() - 2.0 * sech * th - t * sech * (sech2 - th * th);
                (f, d, dd)
            }
            ModeProfile::Exponential { n, parity } => {
                let (g, gd, gdd) = growing_branch(n as f64, t);
                let (h, hd, hdd) = growing_branch(n as f64, -t);
                match parity {
                    Parity::Even => (g + h, gd - hd, gdd + hdd),
                    Parity::Odd => (g - h, gd + hd, gdd - hdd),
                }
            }
        }
    }

    /// Residual of `f'' + (2/cosh^2 t - n^2) f` at `t`.
    pub fn ode_residual(&self, t: f64) -> f64 {
        let (f, _, dd) = self.eval(t);
        let n = self.mode() as f64;
        dd + (2.0 / t.cosh().powi(2) - n * n) * f
    }
}

/// `g = (n - tanh t) e^{nt}` and its first two derivatives.
fn growing_branch(n: f64, t: f64) -> (f64, f64, f64) {
    let th = t.tanh();
    let sech2 = 1.0 / t.cosh().powi(2);
    let e = (n * t).exp();
    let a = n * (n - th) - sech2;
    let g = (n - th) * e;
    let gd = a * e;
    let gdd = (n * a - n * sech2 + 2.0 * sech2 * th) * e;
    (g, gd, gdd)
}

/// Boundary quotient `T f'(T) / f(T)`.
pub fn boundary_quotient(profile: ModeProfile, half_height: f64) -> f64 {
    let (f, d, _) = profile.eval(half_height);
    half_height * d / f
}

/// The two displayed `n >= 2` eigenvalue formulas. `first = true` selects
/// the one with `-` in the numerator and `+` in the denominator.
pub fn displayed_delta(half_height: f64, n: u32, first: bool) -> f64 {
    let t = half_height;
    let nf = n as f64;
    let th = t.tanh();
    let sech2 = 1.0 / t.cosh().powi(2);
    let ep = (nf * t).exp();
    let em = (-nf * t).exp();
    let a = nf * (nf - th) - sech2;
    let b = nf * (nf + th) - sech2;
    let s = if first { 1.0 } else { -1.0 };
    t * (a * ep - s * b * em) / ((nf - th) * ep + s * (nf + th) * em)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeEigenpair {
    pub n: u32,
    pub parity: Parity,
    pub delta: f64,
    /// 1 for `n = 0`; 2 for the `(cos n th, sin n th)` pair.
    pub multiplicity: usize,
    pub profile: ModeProfile,
    /// For `n >= 2`: which displayed formula (1 or 2) this branch matched.
    pub displayed_formula: Option<u8>,
}

impl ModeEigenpair {
    pub fn label(&self) -> ModeLabel {
        ModeLabel {
            n: self.n,
            parity: self.parity,
        }
    }
}

fn pair(profile: ModeProfile, half_height: f64) -> ModeEigenpair {
    let n = profile.mode();
    let delta = boundary_quotient(profile, half_height);
    let displayed_formula = (n >= 2).then(|| {
        let d1 = displayed_delta(half_height, n, true);
        let d2 = displayed_delta(half_height, n, false);
        if (delta - d1).abs() <= (delta - d2).abs() {
            1
        } else {
            2
        }
    });
    ModeEigenpair {
        n,
        parity: profile.parity(),
        delta,
        multiplicity: if n == 0 { 1 } else { 2 },
        profile,
        displayed_formula,
    }
}

/// Every Jacobi-Steklov eigenpair with Fourier mode `n <= n_max`, sorted by
/// delta, then n, then parity. The `n = 0` even profile vanishes on the
/// boundary (it is the fixed-boundary kernel) and is excluded.
pub fn closed_form_spectrum(params: CatenoidParams, n_max: u32) -> Vec<ModeEigenpair> {
    let t = params.half_height;
    let mut out = vec![pair(ModeProfile::Tanh, t)];
    if n_max >= 1 {
        out.push(pair(ModeProfile::Sech, t));
        out.push(pair(ModeProfile::SinhPlusTSech, t));
    }
    for n in 2..=n_max {
        for parity in [Parity::Even, Parity::Odd] {
            out.push(pair(ModeProfile::Exponential { n, parity }, t));
        }
    }
    out.sort_by(|a, b| {
        a.delta
            .total_cmp(&b.delta)
            .then(a.n.cmp(&b.n))
            .then(a.parity.cmp(&b.parity))
    });
    out
}

pub fn mode_rows(pairs: &[ModeEigenpair], method: Option<&str>) -> Vec<ModeRow> {
    let mut rows: Vec<ModeRow> = pairs
        .iter()
        .map(|p| ModeRow {
            n: p.n,
            parity: p.parity,
            delta: p.delta,
            multiplicity: p.multiplicity,
            method: method.map(str::to_owned),
        })
        .collect();
    sort_mode_rows(&mut rows);
    rows
}

/// Expand mode pairs into a Jacobi-Steklov report, one entry per dimension.
pub fn closed_form_dtn_report(
    params: CatenoidParams,
    n_max: u32,
    tol: &ToleranceProfile,
) -> SpectrumReport {
    let entries = closed_form_spectrum(params, n_max)
        .iter()
        .flat_map(|p| std::iter::repeat_n((p.delta, Some(p.label())), p.multiplicity))
        .collect();
    SpectrumReport::new(
        SpectrumKind::JacobiSteklov,
        "closed-form",
        tol.exact_cuts(),
        entries,
    )
}

/// The fixed-boundary facts known in closed form: a single zero eigenvalue
/// spanned by `zeta` and nothing negative.
pub fn closed_form_fixed_report(tol: &ToleranceProfile) -> SpectrumReport {
    SpectrumReport::new(
        SpectrumKind::FixedBoundary,
        "closed-form",
        tol.exact_cuts(),
        vec![(
            0.0,
            Some(ModeLabel {
                n: 0,
                parity: Parity::Even,
            }),
        )],
    )
}

/// Index certificate of the critical catenoid from the closed forms.
pub fn closed_form_index(tol: &ToleranceProfile) -> Result<IndexCertificate> {
    let params = CatenoidParams::critical();
    if !growth_check_n_ge_2(params) {
        return Err(FbmsError::solver("closed-form tail check failed"));
    }
    let fixed = closed_form_fixed_report(tol);
    let dtn = closed_form_dtn_report(params, 1, tol);
    let mut cert = crate::certify::certify(&fixed, &dtn, 1.0, tol)?;
    cert.method = "closed-form".into();
    debug_assert_eq!(
        cert.counts,
        IndexCounts {
            fixed_negative: 0,
            fixed_null: 1,
            dtn_below: 3,
            dtn_at: 2
        }
    );
    Ok(cert)
}

/// Coefficients `(a, b, c)` of `g(n) = (a n^2 - b n + c)/(a n^2 + b n + c)`.
pub fn growth_coefficients(half_height: f64) -> (f64, f64, f64) {
    let t = half_height;
    (t, 1.0 + t * t.tanh(), t.tanh() - t / t.cosh().powi(2))
}

/// `phi(n) = g(n) e^{2nT}`; `delta - 1 > 0` on the even branch iff `phi(n) > 1`.
pub fn growth_ratio(half_height: f64, n: u32) -> f64 {
    let t = half_height;
    let nf = n as f64;
    let th = t.tanh();
    let s = t / t.cosh().powi(2);
    let num = (t * nf - 1.0) * (nf - th) - s;
    let den = (t * nf + 1.0) * (nf + th) - s;
    num / den * (2.0 * nf * t).exp()
}

/// Maximum mode checked by [`growth_check_n_ge_2`].
pub const GROWTH_CHECK_N_MAX: u32 = 50;

/// `true` iff every `n in 2..=50` eigenvalue exceeds 1 on both branches
/// and the even-branch ratio `phi(n)` exceeds 1.
pub fn growth_check_n_ge_2(params: CatenoidParams) -> bool {
    let t = params.half_height;
    (2..=GROWTH_CHECK_N_MAX).all(|n| {
        let even = boundary_quotient(
            ModeProfile::Exponential {
                n,
                parity: Parity::Even,
            },
            t,
        );
        let odd = boundary_quotient(
            ModeProfile::Exponential {
                n,
                parity: Parity::Odd,
            },
            t,
        );
        even > 1.0 && odd > 1.0 && growth_ratio(t, n) > 1.0
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderDirection {
    /// `D+ = d/dt + tanh t`.
    Plus,
    /// `D- = d/dt - tanh t`.
    Minus,
}

/// Minimum sample count accepted by [`ladder_apply`].
pub const LADDER_MIN_POINTS: usize = 16;

/// Apply `D+` or `D-` to a sampled function with second-order differences.
pub fn ladder_apply(direction: LadderDirection, f: &SampledFunction) -> Result<SampledFunction> {
    if f.grid.points < LADDER_MIN_POINTS {
        return Err(FbmsError::validation(format!(
            "ladder operator needs at least {LADDER_MIN_POINTS} samples, got {}",
            f.grid.points
        )));
    }
    let d = f.derivative()?;
    let sign = match direction {
        LadderDirection::Plus => 1.0,
        LadderDirection::Minus => -1.0,
    };
    Ok(d.axpy(sign, &f.multiply_add(|t| t.tanh(), 0.0)))
}

/// `L_k u = u'' + (2/cosh^2 t - k) u` by second-order differences.
pub fn apply_l(k: f64, f: &SampledFunction) -> Result<SampledFunction> {
    let dd = f.second_derivative()?;
    Ok(dd.axpy(1.0, &f.multiply_add(|t| 2.0 / t.cosh().powi(2), -k)))
}

/// `A_k u = u'' - k u` by second-order differences.
pub fn apply_a(k: f64, f: &SampledFunction) -> Result<SampledFunction> {
    let dd = f.second_derivative()?;
    Ok(dd.axpy(-k, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampled::UniformGrid;
    use approx::assert_abs_diff_eq;

    fn params() -> CatenoidParams {
        CatenoidParams::critical()
    }

    #[test]
    fn low_modes_match_theorem_values() {
        let p = params();
        let t = p.half_height;
        let spec = closed_form_spectrum(p, 1);
        assert_eq!(spec.len(), 3);
        assert_abs_diff_eq!(spec[0].delta, -1.0, epsilon = 1e-12);
        assert_eq!(
            (spec[0].n, spec[0].parity, spec[0].multiplicity),
            (1, Parity::Even, 2)
        );
        assert_abs_diff_eq!(spec[1].delta, 1.0 / t.sinh().powi(2), epsilon = 1e-12);
        assert!(spec[1].delta < 1.0);
        assert_eq!(spec[1].multiplicity, 1);
        assert_abs_diff_eq!(spec[2].delta, 1.0, epsilon = 1e-10);
        assert_eq!(spec[2].parity, Parity::Odd);
    }

    #[test]
    fn n1_odd_quotient_reduces_to_one() {
        let t = params().half_height;
        let quotient = t * t.cosh() / (t.sinh() + t / t.cosh());
        let alt = t * t * t.sinh().powi(2) / (t.sinh().powi(2) + 1.0);
        assert_abs_diff_eq!(quotient, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(alt, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn quotients_agree_with_displayed_formulas() {
        let p = params();
        for pair in closed_form_spectrum(p, 12).iter().filter(|m| m.n >= 2) {
            let which = pair.displayed_formula.unwrap();
            let displayed = displayed_delta(p.half_height, pair.n, which == 1);
            assert!((pair.delta - displayed).abs() <= 1e-12 * pair.delta.abs());
            // Even profiles take the `a = b` sign arrangement.
            assert_eq!(which == 1, pair.parity == Parity::Even);
            assert!(pair.delta > 1.0);
        }
    }

    #[test]
    fn profiles_solve_the_mode_equation_and_boundary_condition() {
        let p = params();
        let t_max = p.half_height;
        let mut pairs = closed_form_spectrum(p, 12);
        pairs.push(pair(ModeProfile::SupportProfile, t_max));
        for m in &pairs {
            let scale = (0..=200)
                .map(|i| {
                    m.profile
                        .eval(-t_max + 2.0 * t_max * i as f64 / 200.0)
                        .0
                        .abs()
                })
                .fold(0.0, f64::max);
            for i in 0..=200 {
                let t = -t_max + 2.0 * t_max * i as f64 / 200.0;
                assert!(
                    m.profile.ode_residual(t).abs() <= 1e-10 * scale.max(1.0),
                    "{m:?}"
                );
            }
            if m.profile == ModeProfile::SupportProfile {
                continue;
            }
            let (fp, dp, _) = m.profile.eval(t_max);
            let (fm, dm, _) = m.profile.eval(-t_max);
            assert!((t_max * dp - m.delta * fp).abs() <= 1e-10 * scale);
            assert!((-t_max * dm - m.delta * fm).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn support_profile_vanishes_on_boundary() {
        let t = params().half_height;
        assert_abs_diff_eq!(ModeProfile::SupportProfile.eval(t).0, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ModeProfile::SupportProfile.eval(-t).0, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn spectrum_independent_of_root_bracket() {
        let a = closed_form_spectrum(params(), 12);
        let t = crate::geometry::solve_critical_t(1.1, 1.3, 1e-14).unwrap();
        let b = closed_form_spectrum(CatenoidParams::with_half_height(t), 12);
        for (x, y) in a.iter().zip(&b) {
            assert!((x.delta - y.delta).abs() <= 1e-12 * x.delta.abs().max(1.0));
        }
    }

    #[test]
    fn growth_coefficients_match_quoted_approximations() {
        let (a, b, c) = growth_coefficients(params().half_height);
        assert_abs_diff_eq!(a, 1.2, epsilon = 5e-3);
        assert_abs_diff_eq!(b, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c, 0.4674, epsilon = 5e-3);
        assert!((4.0 * params().half_height).exp() >= 54.0);
        assert!(growth_check_n_ge_2(params()));
    }

    #[test]
    fn index_certificate_is_four_and_three() {
        let cert = closed_form_index(&ToleranceProfile::default()).unwrap();
        assert_eq!(cert.counts.as_tuple(), (0, 1, 3, 2));
        assert_eq!((cert.index, cert.nullity), (4, 3));
        assert_eq!(cert.alpha, 1.0);
        assert_eq!(cert.method, "closed-form");
    }

    #[test]
    fn ladder_plus_annihilates_sech() {
        let t = params().half_height;
        let g = UniformGrid::new(-t, t, 257);
        let f = SampledFunction::from_fn(g, |s| 1.0 / s.cosh());
        let out = ladder_apply(LadderDirection::Plus, &f).unwrap();
        assert!(out.max_abs() < 1e-4);
    }

    #[test]
    fn ladder_rejects_coarse_grids() {
        let f = SampledFunction::from_fn(UniformGrid::new(-1.0, 1.0, 15), |s| s);
        assert!(ladder_apply(LadderDirection::Minus, &f).is_err());
    }

    #[test]
    fn ladder_minus_maps_kernel_of_a4_into_kernel_of_l4() {
        let t = params().half_height;
        let mut errs = Vec::new();
        for points in [129usize, 257] {
            let g = UniformGrid::new(-t, t, points);
            let u = SampledFunction::from_fn(g, |s| (2.0 * s).exp());
            let v = ladder_apply(LadderDirection::Minus, &u).unwrap();
            let exact =
                SampledFunction::from_fn(u.grid.clone(), |s| (2.0 - s.tanh()) * (2.0 * s).exp());
            assert!(v.axpy(-1.0, &exact).max_abs() < 1e-3 * exact.max_abs());
            let l = apply_l(4.0, &v).unwrap();
            // One-sided end stencils contaminate the two outermost nodes.
            errs.push(l.interior_max_abs(2));
        }
        let ratio = errs[0] / errs[1];
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}
