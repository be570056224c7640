//! Parametrized surfaces in the unit ball and their pointwise geometry.
//!
//! A [`SurfaceChart`] maps a rectangle `[t_min, t_max] x [0, 2pi)` into
//! `R^3`. The built-in charts (critical catenoid, equatorial disk) carry
//! analytic derivatives; custom charts fall back to central differences.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{FbmsError, Result};
use crate::tolerance::ToleranceProfile;

pub type Vec3 = Vector3<f64>;

/// Bracket on which `cosh T - T sinh T` changes sign.
pub const CRITICAL_BRACKET: (f64, f64) = (1.0, 1.5);

/// Positive root of `cosh T = T sinh T` by bisection on `[lo, hi]`,
/// stopping once the bracket is narrower than `width`.
pub fn solve_critical_t(lo: f64, hi: f64, width: f64) -> Result<f64> {
    let g = |t: f64| t.cosh() - t * t.sinh();
    let (mut a, mut b) = (lo, hi);
    let (mut ga, gb) = (g(a), g(b));
    if ga * gb > 0.0 {
        return Err(FbmsError::validation(format!(
            "cosh T - T sinh T does not change sign on [{lo}, {hi}]"
        )));
    }
    while b - a > width {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return Ok(m);
        }
        if ga * gm < 0.0 {
            b = m;
        } else {
            a = m;
            ga = gm;
        }
    }
    Ok(0.5 * (a + b))
}

/// The two free-boundary constants of the critical catenoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatenoidParams {
    /// Half-height `T` of the parameter interval `[-T, T]`.
    pub half_height: f64,
    /// Scale `c = 1 / (T cosh T)`.
    pub scale: f64,
}

impl CatenoidParams {
    pub fn critical() -> Self {
        let t = solve_critical_t(CRITICAL_BRACKET.0, CRITICAL_BRACKET.1, 1e-14)
            .expect("the default bracket always contains the root");
        Self::with_half_height(t)
    }

    /// Catenoid on `[-T, T]` with `c = 1/(T cosh T)`. Only the critical `T`
    /// meets the sphere orthogonally.
    pub fn with_half_height(t: f64) -> Self {
        CatenoidParams {
            half_height: t,
            scale: 1.0 / (t * t.cosh()),
        }
    }
}

/// Values of a chart and its first and second partial derivatives.
#[derive(Debug, Clone, Copy)]
pub struct ChartDerivatives {
    pub x: Vec3,
    pub x_t: Vec3,
    pub x_th: Vec3,
    pub x_tt: Vec3,
    pub x_tth: Vec3,
    pub x_thth: Vec3,
}

pub type PositionFn = Arc<dyn Fn(f64, f64) -> Vec3 + Send + Sync>;
pub type DerivativeFn = Arc<dyn Fn(f64, f64) -> ChartDerivatives + Send + Sync>;

#[derive(Clone)]
pub enum ChartKind {
    Catenoid(CatenoidParams),
    EquatorialDisk,
    Custom {
        position: PositionFn,
        derivatives: Option<DerivativeFn>,
    },
}

impl fmt::Debug for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartKind::Catenoid(p) => f.debug_tuple("Catenoid").field(p).finish(),
            ChartKind::EquatorialDisk => write!(f, "EquatorialDisk"),
            ChartKind::Custom { derivatives, .. } => f
                .debug_struct("Custom")
                .field("analytic_derivatives", &derivatives.is_some())
                .finish(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryComponent {
    /// The curve `t = t_min`.
    Lower,
    /// The curve `t = t_max`.
    Upper,
}

#[derive(Debug, Clone)]
pub struct SurfaceChart {
    pub name: String,
    pub kind: ChartKind,
    pub t_min: f64,
    pub t_max: f64,
    /// The second coordinate ranges over `[0, 2pi)` and wraps.
    pub periodic_theta: bool,
    pub ambient_dim: usize,
    pub boundary: Vec<BoundaryComponent>,
    /// `t = t_min` is a coordinate singularity (polar center) rather than a
    /// boundary curve. Geometry only records it; the assembler excises it.
    pub center_singularity: bool,
    /// Sign applied to `X_t x X_theta` to obtain the unit normal.
    pub orientation: f64,
    /// How the orientation was chosen, for reports.
    pub orientation_note: String,
}

/// First- and second-order geometry at one parameter point.
#[derive(Debug, Clone, Copy)]
pub struct PointGeometry {
    pub x: Vec3,
    pub nu: Vec3,
    pub metric: Matrix2<f64>,
    /// `h_ij = <X_ij, nu>` in the coordinate frame.
    pub second_form: Matrix2<f64>,
    /// `|h|^2 = tr(g^-1 h g^-1 h)`.
    pub h_norm_sq: f64,
    /// Support function `<X, nu>`.
    pub zeta: f64,
    /// `|X_t|^2` when the chart is conformal at this point.
    pub conformal_factor: Option<f64>,
    pub derivatives: ChartDerivatives,
}

impl PointGeometry {
    pub fn metric_det(&self) -> f64 {
        self.metric.determinant()
    }

    pub fn area_element(&self) -> f64 {
        self.metric_det().sqrt()
    }

    pub fn inverse_metric(&self) -> Matrix2<f64> {
        let g = &self.metric;
        let det = g.determinant();
        Matrix2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]) / det
    }

    /// Mean curvature `g^ij h_ij`.
    pub fn mean_curvature(&self) -> f64 {
        (self.inverse_metric() * self.second_form).trace()
    }
}

pub fn make_critical_catenoid() -> SurfaceChart {
    make_catenoid(CatenoidParams::critical())
}

/// Catenoid `X = c(cosh t cos th, cosh t sin th, t)` on `[-T, T]`.
pub fn make_catenoid(params: CatenoidParams) -> SurfaceChart {
    let t = params.half_height;
    finish_orientation(SurfaceChart {
        name: "catenoid".into(),
        kind: ChartKind::Catenoid(params),
        t_min: -t,
        t_max: t,
        periodic_theta: true,
        ambient_dim: 3,
        boundary: vec![BoundaryComponent::Lower, BoundaryComponent::Upper],
        center_singularity: false,
        orientation: 1.0,
        orientation_note: String::new(),
    })
}

/// Polar chart `X = (r cos th, r sin th, 0)`, `r in [0, 1]`.
pub fn make_equatorial_disk() -> SurfaceChart {
    finish_orientation(SurfaceChart {
        name: "disk".into(),
        kind: ChartKind::EquatorialDisk,
        t_min: 0.0,
        t_max: 1.0,
        periodic_theta: true,
        ambient_dim: 3,
        boundary: vec![BoundaryComponent::Upper],
        center_singularity: true,
        orientation: 1.0,
        orientation_note: String::new(),
    })
}

/// A user-supplied chart over `[t_min, t_max] x [0, 2pi)`.
pub fn make_custom_chart(
    name: impl Into<String>,
    t_range: (f64, f64),
    position: PositionFn,
    derivatives: Option<DerivativeFn>,
) -> Result<SurfaceChart> {
    if !(t_range.1 > t_range.0) {
        return Err(FbmsError::validation("custom chart needs t_min < t_max"));
    }
    Ok(finish_orientation(SurfaceChart {
        name: name.into(),
        kind: ChartKind::Custom {
            position,
            derivatives,
        },
        t_min: t_range.0,
        t_max: t_range.1,
        periodic_theta: true,
        ambient_dim: 3,
        boundary: vec![BoundaryComponent::Lower, BoundaryComponent::Upper],
        center_singularity: false,
        orientation: 1.0,
        orientation_note: String::new(),
    }))
}

/// Pick the normal so that `zeta = <X, nu>` is positive somewhere; when
/// `zeta` vanishes identically keep the cross-product orientation.
fn finish_orientation(mut chart: SurfaceChart) -> SurfaceChart {
    let mut best = 0.0f64;
    let nt = 17;
    let nth = 16;
    for i in 0..nt {
        let t = chart.t_min + (chart.t_max - chart.t_min) * (i as f64 + 0.5) / nt as f64;
        for j in 0..nth {
            let th = 2.0 * PI * j as f64 / nth as f64;
            let d = chart.derivatives(t, th);
            let cross = d.x_t.cross(&d.x_th);
            let norm = cross.norm();
            if norm == 0.0 {
                continue;
            }
            let z = d.x.dot(&cross) / norm;
            if z.abs() > best.abs() {
                best = z;
            }
        }
    }
    if best.abs() < 1e-12 {
        chart.orientation = 1.0;
        chart.orientation_note = "zeta vanishes identically; cross-product orientation".into();
    } else if best > 0.0 {
        chart.orientation = 1.0;
        chart.orientation_note = "nu = +X_t x X_theta (zeta > 0 somewhere)".into();
    } else {
        chart.orientation = -1.0;
        chart.orientation_note = "nu = -X_t x X_theta (zeta > 0 somewhere)".into();
    }
    chart
}

impl SurfaceChart {
    pub fn has_analytic_derivatives(&self) -> bool {
        match &self.kind {
            ChartKind::Catenoid(_) | ChartKind::EquatorialDisk => true,
            ChartKind::Custom { derivatives, .. } => derivatives.is_some(),
        }
    }

    pub fn catenoid_params(&self) -> Option<CatenoidParams> {
        match self.kind {
            ChartKind::Catenoid(p) => Some(p),
            _ => None,
        }
    }

    pub fn extent(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn position(&self, t: f64, th: f64) -> Vec3 {
        match &self.kind {
            ChartKind::Catenoid(p) => {
                let c = p.scale;
                Vec3::new(c * t.cosh() * th.cos(), c * t.cosh() * th.sin(), c * t)
            }
            ChartKind::EquatorialDisk => Vec3::new(t * th.cos(), t * th.sin(), 0.0),
            ChartKind::Custom { position, .. } => position(t, th),
        }
    }

    pub fn derivatives(&self, t: f64, th: f64) -> ChartDerivatives {
        match &self.kind {
            ChartKind::Catenoid(p) => {
                let c = p.scale;
                let (ch, sh) = (t.cosh(), t.sinh());
                let (ct, st) = (th.cos(), th.sin());
                ChartDerivatives {
                    x: Vec3::new(c * ch * ct, c * ch * st, c * t),
                    x_t: Vec3::new(c * sh * ct, c * sh * st, c),
                    x_th: Vec3::new(-c * ch * st, c * ch * ct, 0.0),
                    x_tt: Vec3::new(c * ch * ct, c * ch * st, 0.0),
                    x_tth: Vec3::new(-c * sh * st, c * sh * ct, 0.0),
                    x_thth: Vec3::new(-c * ch * ct, -c * ch * st, 0.0),
                }
            }
            ChartKind::EquatorialDisk => {
                let (ct, st) = (th.cos(), th.sin());
                ChartDerivatives {
                    x: Vec3::new(t * ct, t * st, 0.0),
                    x_t: Vec3::new(ct, st, 0.0),
                    x_th: Vec3::new(-t * st, t * ct, 0.0),
                    x_tt: Vec3::zeros(),
                    x_tth: Vec3::new(-st, ct, 0.0),
                    x_thth: Vec3::new(-t * ct, -t * st, 0.0),
                }
            }
            ChartKind::Custom {
                derivatives: Some(d),
                ..
            } => d(t, th),
            ChartKind::Custom { position, .. } => {
                let h = 1e-5 * self.extent();
                finite_difference_derivatives(position.as_ref(), t, th, h, h)
            }
        }
    }

    /// Pointwise geometry; errors if the metric degenerates.
    pub fn point_geometry(&self, t: f64, th: f64) -> Result<PointGeometry> {
        self.point_geometry_with(t, th, &ToleranceProfile::default())
    }

    pub fn point_geometry_with(
        &self,
        t: f64,
        th: f64,
        tol: &ToleranceProfile,
    ) -> Result<PointGeometry> {
        let d = self.derivatives(t, th);
        let e = d.x_t.dot(&d.x_t);
        let f = d.x_t.dot(&d.x_th);
        let g = d.x_th.dot(&d.x_th);
        let metric = Matrix2::new(e, f, f, g);
        let det = e * g - f * f;
        if det < tol.metric_degeneracy {
            return Err(FbmsError::SingularChart { t, theta: th, det });
        }
        let cross = d.x_t.cross(&d.x_th);
        let nu = cross * (self.orientation / cross.norm());
        let second_form = Matrix2::new(
            d.x_tt.dot(&nu),
            d.x_tth.dot(&nu),
            d.x_tth.dot(&nu),
            d.x_thth.dot(&nu),
        );
        let ginv = Matrix2::new(g, -f, -f, e) / det;
        let shape = ginv * second_form;
        let h_norm_sq = (shape * shape).trace().max(0.0);
        let conformal = (e - g).abs() <= 1e-10 * e.max(g) && f.abs() <= 1e-10 * e.max(g);
        Ok(PointGeometry {
            x: d.x,
            nu,
            metric,
            second_form,
            h_norm_sq,
            zeta: d.x.dot(&nu),
            conformal_factor: conformal.then_some(e),
            derivatives: d,
        })
    }

    /// Outward unit conormal on a boundary component.
    pub fn outward_conormal(&self, comp: BoundaryComponent, th: f64) -> Vec3 {
        let t = self.boundary_t(comp);
        let d = self.derivatives(t, th);
        let tangent = d.x_th / d.x_th.norm();
        let inward_free = d.x_t - tangent * d.x_t.dot(&tangent);
        let sign = match comp {
            BoundaryComponent::Upper => 1.0,
            BoundaryComponent::Lower => -1.0,
        };
        inward_free * (sign / inward_free.norm())
    }

    pub fn boundary_t(&self, comp: BoundaryComponent) -> f64 {
        match comp {
            BoundaryComponent::Lower => self.t_min,
            BoundaryComponent::Upper => self.t_max,
        }
    }

    /// Scale turning `d/dt` into the outward conormal derivative on a
    /// boundary curve, for functions vanishing on that curve:
    /// `D_eta u = sign * sqrt(g^tt) * u_t`.
    pub fn boundary_scale(&self, comp: BoundaryComponent, th: f64) -> Result<f64> {
        let pg = self.point_geometry(self.boundary_t(comp), th)?;
        let ginv = pg.inverse_metric();
        Ok(ginv[(0, 0)].sqrt())
    }
}

/// Central differences of a position map with steps `(ht, hth)`.
pub fn finite_difference_derivatives(
    pos: &(dyn Fn(f64, f64) -> Vec3 + Send + Sync),
    t: f64,
    th: f64,
    ht: f64,
    hth: f64,
) -> ChartDerivatives {
    let x = pos(t, th);
    let xp = pos(t + ht, th);
    let xm = pos(t - ht, th);
    let yp = pos(t, th + hth);
    let ym = pos(t, th - hth);
    let pp = pos(t + ht, th + hth);
    let pm = pos(t + ht, th - hth);
    let mp = pos(t - ht, th + hth);
    let mm = pos(t - ht, th - hth);
    ChartDerivatives {
        x,
        x_t: (xp - xm) / (2.0 * ht),
        x_th: (yp - ym) / (2.0 * hth),
        x_tt: (xp - x * 2.0 + xm) / (ht * ht),
        x_tth: (pp - pm - mp + mm) / (4.0 * ht * hth),
        x_thth: (yp - x * 2.0 + ym) / (hth * hth),
    }
}

/// Largest relative change of the finite-difference derivatives of a
/// custom chart when the step is halved, over a sample grid.
pub fn finite_difference_consistency(chart: &SurfaceChart, samples: usize) -> f64 {
    let ChartKind::Custom { position, .. } = &chart.kind else {
        return 0.0;
    };
    let h = 1e-5 * chart.extent();
    let mut worst = 0.0f64;
    for i in 0..samples {
        let t = chart.t_min + chart.extent() * (i as f64 + 0.5) / samples as f64;
        for j in 0..samples {
            let th = 2.0 * PI * j as f64 / samples as f64;
            let a = finite_difference_derivatives(position.as_ref(), t, th, h, h);
            let b = finite_difference_derivatives(position.as_ref(), t, th, h / 2.0, h / 2.0);
            for (u, v) in [(a.x_t, b.x_t), (a.x_th, b.x_th)] {
                let scale = v.norm().max(1e-300);
                worst = worst.max((u - v).norm() / scale);
            }
        }
    }
    worst
}

/// Largest defect of the positive-definiteness, unit-normal, tangency and
/// minimality invariants over an interior sample grid.
pub fn chart_invariant_defect(chart: &SurfaceChart, samples: usize) -> Result<[f64; 3]> {
    let mut normal: f64 = 0.0;
    let mut tangency: f64 = 0.0;
    let mut mean: f64 = 0.0;
    for i in 0..samples {
        let t = chart.t_min + chart.extent() * (i as f64 + 0.5) / samples as f64;
        for j in 0..samples {
            let th = 2.0 * PI * j as f64 / samples as f64;
            let pg = chart.point_geometry(t, th)?;
            let d = &pg.derivatives;
            normal = normal.max((pg.nu.norm() - 1.0).abs());
            let a = pg.nu.dot(&d.x_t);
            let b = pg.nu.dot(&d.x_th);
            tangency = tangency.max(a * a + b * b);
            mean = mean.max(pg.mean_curvature().abs());
        }
    }
    Ok([normal, tangency, mean])
}

/// Max over boundary samples of `| |X|^2 - 1 |`, `|<nu, X>|` and the angle
/// between the outward conormal and `X`.
pub fn free_boundary_residual(chart: &SurfaceChart, samples: usize) -> Result<f64> {
    if samples < 8 {
        return Err(FbmsError::validation(
            "free_boundary_residual needs at least 8 samples",
        ));
    }
    let mut worst = 0.0f64;
    for &comp in &chart.boundary {
        let t = chart.boundary_t(comp);
        for j in 0..samples {
            let th = 2.0 * PI * j as f64 / samples as f64;
            let pg = chart.point_geometry(t, th)?;
            let x = pg.x;
            let on_sphere = (x.dot(&x) - 1.0).abs();
            let orthogonal = pg.nu.dot(&x).abs();
            let eta = chart.outward_conormal(comp, th);
            let xn = x / x.norm();
            let angle = eta.cross(&xn).norm().atan2(eta.dot(&xn));
            worst = worst.max(on_sphere).max(orthogonal).max(angle.abs());
        }
    }
    Ok(worst)
}

/// Sampled fields below this are treated as identically zero.
const VANISHING_FIELD: f64 = 1e-10;
/// Residuals below this multiple of `max |u|` are second-difference roundoff.
const ROUNDOFF_RESIDUAL: f64 = 1e-9;

/// Jacobi fields known in closed form on a minimal surface in the ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JacobiFieldKind {
    /// `nu_a = <nu, a>` for a constant vector `a`.
    NormalComponent(Vec3),
    /// `zeta = <X, nu>`.
    Support,
    /// `<M X, nu>` for skew-symmetric `M`.
    Rotation(Matrix3<f64>),
}

impl JacobiFieldKind {
    pub fn validate(&self) -> Result<()> {
        if let JacobiFieldKind::Rotation(m) = self {
            let skew = (m + m.transpose()).abs().max();
            if skew > 1e-12 * m.abs().max().max(1.0) {
                return Err(FbmsError::validation(format!(
                    "rotation generator is not skew-symmetric (|M + M^T| = {skew:e})"
                )));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, pg: &PointGeometry) -> f64 {
        match self {
            JacobiFieldKind::NormalComponent(a) => pg.nu.dot(a),
            JacobiFieldKind::Support => pg.zeta,
            JacobiFieldKind::Rotation(m) => (m * pg.x).dot(&pg.nu),
        }
    }

    /// Rotation about the axis `a`, i.e. `M X = a x X`.
    pub fn rotation_about(a: Vec3) -> Self {
        JacobiFieldKind::Rotation(a.cross_matrix())
    }
}

/// Result of a discrete Jacobi-operator residual evaluation.
#[derive(Debug, Clone, Copy)]
pub struct JacobiResidual {
    /// `max |J_h u|` over interior nodes.
    pub max_abs: f64,
    /// `max |J_h u|` divided by the largest sum of the magnitudes of the
    /// individual Laplacian terms plus `max ||h|^2 u|`; zero
    /// when the field vanishes up to roundoff.
    pub relative: f64,
}

/// Apply the second-order finite-difference Jacobi operator
/// `J = Delta_Sigma + |h|^2` to a sampled Jacobi field on an
/// `nt x ntheta` interval grid and report the interior residual.
///
/// Only the field is differenced; metric and Christoffel symbols are
/// evaluated from the chart, so the residual measures the `O(h^2)`
/// truncation error of the field derivatives.
pub fn jacobi_field_residual(
    chart: &SurfaceChart,
    field: JacobiFieldKind,
    grid: (usize, usize),
) -> Result<JacobiResidual> {
    field.validate()?;
    let (nt, nth) = grid;
    if nt < 4 || nth < 4 {
        return Err(FbmsError::validation(
            "jacobi_field_residual grid too coarse",
        ));
    }
    let tol = ToleranceProfile::default();
    let t0 = if chart.center_singularity {
        tol.disk_excision
    } else {
        chart.t_min
    };
    let ht = (chart.t_max - t0) / nt as f64;
    let hth = 2.0 * PI / nth as f64;
    let mut values = vec![0.0; (nt + 1) * nth];
    for i in 0..=nt {
        for j in 0..nth {
            let pg = chart.point_geometry(t0 + i as f64 * ht, j as f64 * hth)?;
            values[i * nth + j] = field.evaluate(&pg);
        }
    }
    let at = |i: usize, j: isize| values[i * nth + j.rem_euclid(nth as isize) as usize];
    let mut max_res = 0.0f64;
    let mut max_lap = 0.0f64;
    let mut max_pot = 0.0f64;
    for i in 1..nt {
        for j in 0..nth as isize {
            let t = t0 + i as f64 * ht;
            let th = j as f64 * hth;
            let pg = chart.point_geometry(t, th)?;
            let d = &pg.derivatives;
            let u = at(i, j);
            let u_t = (at(i + 1, j) - at(i - 1, j)) / (2.0 * ht);
            let u_th = (at(i, j + 1) - at(i, j - 1)) / (2.0 * hth);
            let u_tt = (at(i + 1, j) - 2.0 * u + at(i - 1, j)) / (ht * ht);
            let u_thth = (at(i, j + 1) - 2.0 * u + at(i, j - 1)) / (hth * hth);
            let u_tth = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1))
                / (4.0 * ht * hth);
            let ginv = pg.inverse_metric();
            // g^ij X_ij, projected on the tangent frame, gives g^ij Gamma^k_ij.
            let trace_xij =
                d.x_tt * ginv[(0, 0)] + d.x_tth * (2.0 * ginv[(0, 1)]) + d.x_thth * ginv[(1, 1)];
            let proj = nalgebra::Vector2::new(trace_xij.dot(&d.x_t), trace_xij.dot(&d.x_th));
            let gamma = ginv * proj;
            let lap = ginv[(0, 0)] * u_tt + 2.0 * ginv[(0, 1)] * u_tth + ginv[(1, 1)] * u_thth
                - gamma[0] * u_t
                - gamma[1] * u_th;
            let pot = pg.h_norm_sq * u;
            let terms = (ginv[(0, 0)] * u_tt).abs()
                + (2.0 * ginv[(0, 1)] * u_tth).abs()
                + (ginv[(1, 1)] * u_thth).abs()
                + (gamma[0] * u_t).abs()
                + (gamma[1] * u_th).abs();
            max_res = max_res.max((lap + pot).abs());
            max_lap = max_lap.max(terms);
            max_pot = max_pot.max(pot.abs());
        }
    }
    let scale = max_lap + max_pot;
    // A field that vanishes up to roundoff (rotation about a symmetry
    // axis, say) has no meaningful relative residual.
    let field_max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(JacobiResidual {
        max_abs: max_res,
        // Residuals at the roundoff level of the second differences carry
        // no relative information either.
        relative: if scale == 0.0
            || field_max < VANISHING_FIELD
            || max_res < ROUNDOFF_RESIDUAL * field_max
        {
            0.0
        } else {
            max_res / scale
        },
    })
}
