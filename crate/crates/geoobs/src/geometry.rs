//! Obstacle boundary surfaces as graphs `z = g(x, y)` over a chart box, with
//! the feasible region `M = {z <= g}` (the obstacle lies strictly above the
//! graph). This module owns frame placement, the normalized two-surface
//! configuration, normal-form extraction, intersection curves, and chart
//! re-expansion after a rigid motion.

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{
    solve_implicit, Axis, BivariateSeries, SeriesError, UnivariateSeries, ZERO_THRESHOLD,
};

pub const DEFAULT_CHART_RADIUS: f64 = 0.5;
/// Orthogonality tolerance for stored frames.
pub const FRAME_ORTHOGONALITY_TOL: f64 = 1e-12;
/// How close a point must sit to `z = g(x, y)` to count as on the surface.
pub const ON_SURFACE_TOL: f64 = 1e-8;
/// Frame-normalization tolerance on `g_x(0,0)` and `phi'(0)`.
pub const NORMALIZED_TOL: f64 = 1e-9;
/// Tilt scan parameters for the wide-angle two-surface case.
pub const TILT_SCAN_HALF_RANGE: f64 = std::f64::consts::FRAC_PI_4;
pub const TILT_SCAN_STEP: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("point is not on both surfaces (clearances {0:e} and {1:e})")]
    NotOnIntersection(f64, f64),
    #[error("surface normals are parallel at the base point (|n1 x n2| = {0:e})")]
    ParallelNormals(f64),
    #[error("no x-axis rotation achieves k1 < 1 < k2 with k1*k2 < 1 (best admissible product {best:.6})")]
    NoValidTilt { best: f64 },
    #[error("frame not normalized: {what} = {value:e}")]
    FrameNotNormalized { what: &'static str, value: f64 },
    #[error("intersection curve has nonzero slope phi'(0) = {0:e}")]
    NonzeroSlope(f64),
    #[error("implicit graph solve failed: {0}")]
    ImplicitSolveFailed(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("invalid contact data: {0}")]
    InvalidContact(String),
}

/// Rigid placement of a chart in world coordinates: `world = rotation * chart + origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    rotation: Matrix3<f64>,
    origin: Vector3<f64>,
}

impl Frame {
    pub fn identity() -> Self {
        Frame { rotation: Matrix3::identity(), origin: Vector3::zeros() }
    }

    pub fn new(rotation: Matrix3<f64>, origin: Vector3<f64>) -> Result<Self, GeometryError> {
        let defect = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        if defect > FRAME_ORTHOGONALITY_TOL {
            return Err(GeometryError::InvalidFrame(format!(
                "rotation is not orthogonal (defect {defect:e})"
            )));
        }
        if rotation.determinant() < 0.0 {
            return Err(GeometryError::InvalidFrame("rotation has determinant -1".into()));
        }
        Ok(Frame { rotation, origin })
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn origin(&self) -> &Vector3<f64> {
        &self.origin
    }

    pub fn to_world(&self, chart: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * chart + self.origin
    }

    pub fn to_chart(&self, world: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * (world - self.origin)
    }

    pub fn dir_to_world(&self, chart: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * chart
    }

    pub fn dir_to_chart(&self, world: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * world
    }
}

#[derive(Serialize, Deserialize)]
struct FrameRepr {
    rotation: [[f64; 3]; 3],
    origin: [f64; 3],
}

impl Serialize for Frame {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let r = &self.rotation;
        FrameRepr {
            rotation: [
                [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
                [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
                [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
            ],
            origin: [self.origin.x, self.origin.y, self.origin.z],
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Frame {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = FrameRepr::deserialize(deserializer)?;
        let m = Matrix3::from_fn(|r, c| repr.rotation[r][c]);
        Frame::new(m, Vector3::new(repr.origin[0], repr.origin[1], repr.origin[2]))
            .map_err(D::Error::custom)
    }
}

/// Obstacle boundary `z = g(x, y)` with feasible region `M = {z <= g}` in
/// chart coordinates. First and second derivatives of `g` are precomputed
/// once; the type is immutable afterwards.
#[derive(Debug, Clone)]
pub struct Surface {
    g: BivariateSeries,
    frame: Frame,
    chart_radius: f64,
    gx: BivariateSeries,
    gy: BivariateSeries,
    gxx: BivariateSeries,
    gxy: BivariateSeries,
    gyy: BivariateSeries,
}

impl Surface {
    pub fn new(g: BivariateSeries, frame: Frame, chart_radius: f64) -> Self {
        assert!(chart_radius > 0.0, "chart radius must be positive");
        let gx = g.partial(Axis::X);
        let gy = g.partial(Axis::Y);
        let gxx = gx.partial(Axis::X);
        let gxy = gx.partial(Axis::Y);
        let gyy = gy.partial(Axis::Y);
        Surface { g, frame, chart_radius, gx, gy, gxx, gxy, gyy }
    }

    /// Identity frame, default chart radius.
    pub fn from_series(g: BivariateSeries) -> Self {
        Self::new(g, Frame::identity(), DEFAULT_CHART_RADIUS)
    }

    pub fn g(&self) -> &BivariateSeries {
        &self.g
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn chart_radius(&self) -> f64 {
        self.chart_radius
    }

    pub fn height(&self, x: f64, y: f64) -> f64 {
        self.g.eval(x, y)
    }

    pub fn gradient(&self, x: f64, y: f64) -> Vector2<f64> {
        Vector2::new(self.gx.eval(x, y), self.gy.eval(x, y))
    }

    /// Second fundamental form numerator `g_xx vx^2 + 2 g_xy vx vy + g_yy vy^2`.
    pub fn hessian_form(&self, x: f64, y: f64, vx: f64, vy: f64) -> f64 {
        self.gxx.eval(x, y) * vx * vx
            + 2.0 * self.gxy.eval(x, y) * vx * vy
            + self.gyy.eval(x, y) * vy * vy
    }

    pub fn in_chart(&self, x: f64, y: f64) -> bool {
        x.abs() <= self.chart_radius && y.abs() <= self.chart_radius
    }

    /// Unnormalized outward normal `(-g_x, -g_y, 1)` in chart coordinates.
    pub fn normal_at(&self, x: f64, y: f64) -> Vector3<f64> {
        let grad = self.gradient(x, y);
        Vector3::new(-grad.x, -grad.y, 1.0)
    }

    /// Signed clearance `g(x, y) - z`; nonnegative inside `M`.
    pub fn clearance(&self, p: &Vector3<f64>) -> f64 {
        self.height(p.x, p.y) - p.z
    }
}

#[derive(Serialize, Deserialize)]
struct SurfaceRepr {
    g: BivariateSeries,
    #[serde(default = "default_radius")]
    chart_radius: f64,
    #[serde(default)]
    frame: Option<Frame>,
}

fn default_radius() -> f64 {
    DEFAULT_CHART_RADIUS
}

impl Serialize for Surface {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SurfaceRepr {
            g: self.g.clone(),
            chart_radius: self.chart_radius,
            frame: Some(self.frame.clone()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Surface {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = SurfaceRepr::deserialize(deserializer)?;
        if !(repr.chart_radius.is_finite() && repr.chart_radius > 0.0) {
            return Err(D::Error::custom("chart_radius must be positive and finite"));
        }
        Ok(Surface::new(repr.g, repr.frame.unwrap_or_else(Frame::identity), repr.chart_radius))
    }
}

/// Decomposition `g = k_sign*k*y + x^N a(x,y) + x*y b(x,y) + y^2 c(y)` of a
/// graph in a normalized frame. `n = None` flags `g(x, 0) == 0` through the
/// working order.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub k: f64,
    pub k_sign: f64,
    pub n: Option<usize>,
    pub a00: f64,
    pub a: BivariateSeries,
    pub b: BivariateSeries,
    pub c: UnivariateSeries,
}

impl NormalForm {
    /// Rebuilds the graph series from the stored pieces.
    pub fn reassemble(&self, order: usize) -> BivariateSeries {
        let mut g = BivariateSeries::zero(order);
        if order >= 1 && self.k != 0.0 {
            g.set_coeff(0, 1, self.k_sign * self.k);
        }
        if let Some(n) = self.n {
            for (i, j, c) in self.a.iter() {
                debug_assert_eq!(j, 0);
                if i + n <= order {
                    g.add_to_coeff(i + n, j, c);
                }
            }
        }
        for (i, j, c) in self.b.iter() {
            if i + j + 2 <= order {
                g.add_to_coeff(i + 1, j + 1, c);
            }
        }
        for (k, &c) in self.c.coeffs().iter().enumerate() {
            if c != 0.0 && k + 2 <= order {
                g.add_to_coeff(0, k + 2, c);
            }
        }
        g
    }
}

/// Splits a normalized graph into its normal form. Requires `g(0,0) = 0` and
/// `g_x(0,0) = 0` up to [`NORMALIZED_TOL`].
pub fn extract_normal_form(surface: &Surface) -> Result<NormalForm, GeometryError> {
    let g = surface.g();
    let g00 = g.coeff(0, 0);
    if g00.abs() > NORMALIZED_TOL {
        return Err(GeometryError::FrameNotNormalized { what: "g(0,0)", value: g00 });
    }
    let gx0 = g.coeff(1, 0);
    if gx0.abs() > NORMALIZED_TOL {
        return Err(GeometryError::FrameNotNormalized { what: "g_x(0,0)", value: gx0 });
    }
    let k_signed = g.coeff(0, 1);
    let (k, k_sign) = if k_signed < 0.0 { (-k_signed, -1.0) } else { (k_signed, 1.0) };

    let order = g.order();
    // Leading pure-x exponent; i = 1 is frame noise certified below NORMALIZED_TOL.
    let n = g
        .iter()
        .filter(|&(i, j, c)| j == 0 && i >= 2 && c.abs() > ZERO_THRESHOLD)
        .map(|(i, _, _)| i)
        .min();

    let mut a = BivariateSeries::zero(order);
    let mut b = BivariateSeries::zero(order);
    let mut c = UnivariateSeries::zero(order.saturating_sub(2));
    for (i, j, coeff) in g.iter() {
        match (i, j) {
            (0, 0) | (1, 0) | (0, 1) => {}
            (i, 0) => {
                if let Some(n) = n {
                    if i >= n {
                        a.set_coeff(i - n, 0, coeff);
                    }
                }
            }
            (0, j) => c.set_coeff(j - 2, coeff),
            (i, j) => b.set_coeff(i - 1, j - 1, coeff),
        }
    }
    let a00 = a.coeff(0, 0);
    Ok(NormalForm { k, k_sign, n, a00, a, b, c })
}

/// Projection of `S1 ∩ S2` onto the chart plane: `y = phi(x)` with leading
/// term `a_M x^M`. `m = None` flags `phi == 0` through the working order.
#[derive(Debug, Clone)]
pub struct IntersectionCurve {
    pub phi: UnivariateSeries,
    pub m: Option<usize>,
    pub a_m: f64,
}

/// Solves `g - h = 0` for the intersection curve of two graphs sharing a
/// normalized chart.
pub fn intersection_curve(s1: &Surface, s2: &Surface) -> Result<IntersectionCurve, GeometryError> {
    let diff = s1.g().sub(s2.g());
    let order = diff.order();
    let phi = solve_implicit(&diff, order)?;
    let slope = phi.coeff(1);
    if slope.abs() > NORMALIZED_TOL {
        return Err(GeometryError::NonzeroSlope(slope));
    }
    let m = phi.leading_exponent();
    let a_m = m.map_or(0.0, |m| phi.coeff(m));
    Ok(IntersectionCurve { phi, m, a_m })
}

/// Angle between the surfaces at the base point, classified by the angle of
/// their outward unit normals: `Acute` below 90 degrees (symmetric normals
/// with k < 1 exist), `Obtuse` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleClass {
    Acute,
    Obtuse,
}

/// Normalized chart normals: symmetric `(0, -k, 1)/(0, k, 1)` in the acute
/// case, or the tilted asymmetric pair in the wide-angle case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalizedNormals {
    Symmetric { k: f64 },
    Tilted { k1: f64, k2: f64, tilt: f64 },
}

#[derive(Debug, Clone)]
pub struct TwoSurfaceFrame {
    /// World placement of the normalized chart: x along the intersection
    /// tangent, z along the bisector of the outward normals.
    pub frame: Frame,
    /// Both surfaces re-expanded as graphs over the normalized chart.
    pub s1: Surface,
    pub s2: Surface,
    pub normals: NormalizedNormals,
    pub angle_class: AngleClass,
}

/// Builds the normalized frame at a transversal intersection point `p`
/// (world coordinates) and re-expands both surfaces in it.
///
/// The y-axis is taken along `n2 - n1` and the z-axis along `n1 + n2`, which
/// yields chart normals `(0, -k, 1)` and `(0, k, 1)` with `k = tan(theta/2)`
/// for normal angle `theta`. When `k >= 1` the configuration is classified
/// `Obtuse` and rotations about the x-axis are scanned for an asymmetric pair
/// `k1 < 1 < k2` with `k1 k2 < 1`; the scan reports [`GeometryError::NoValidTilt`]
/// with the best admissible product when no rotation qualifies (the product
/// `tan(u) tan(v)` with `u + v` fixed at the normal angle is minimized by the
/// symmetric split, so a wide normal angle admits none).
pub fn two_surface_frame(
    s1: &Surface,
    s2: &Surface,
    p: &Vector3<f64>,
) -> Result<TwoSurfaceFrame, GeometryError> {
    let q1 = s1.frame().to_chart(p);
    let q2 = s2.frame().to_chart(p);
    let c1 = s1.clearance(&q1);
    let c2 = s2.clearance(&q2);
    if c1.abs() > ON_SURFACE_TOL || c2.abs() > ON_SURFACE_TOL {
        return Err(GeometryError::NotOnIntersection(c1, c2));
    }
    let n1 = s1.frame().dir_to_world(&s1.normal_at(q1.x, q1.y)).normalize();
    let n2 = s2.frame().dir_to_world(&s2.normal_at(q2.x, q2.y)).normalize();
    let cross = n1.cross(&n2);
    if cross.norm() < 1e-8 {
        return Err(GeometryError::ParallelNormals(cross.norm()));
    }

    let y_axis = (n2 - n1).normalize();
    let z_axis = (n1 + n2).normalize();
    let x_axis = y_axis.cross(&z_axis);
    let rotation = Matrix3::from_columns(&[x_axis, y_axis, z_axis]);
    let frame = Frame::new(rotation, *p)?;

    // Chart components of the unit normals in the symmetric frame.
    let m1 = frame.dir_to_chart(&n1);
    let k_sym = (-m1.y / m1.z).abs();

    if k_sym < 1.0 {
        let (r1, r2) = reexpand_pair(s1, s2, &frame)?;
        let k = r1.g().coeff(0, 1);
        return Ok(TwoSurfaceFrame {
            frame,
            s1: r1,
            s2: r2,
            normals: NormalizedNormals::Symmetric { k },
            angle_class: AngleClass::Acute,
        });
    }

    // Wide angle: scan x-axis rotations for k1 < 1 < k2 with k1 k2 < 1.
    let mut best_product = f64::INFINITY;
    let mut best: Option<(f64, f64, f64)> = None;
    let steps = (TILT_SCAN_HALF_RANGE / TILT_SCAN_STEP) as i64;
    for step in -steps..=steps {
        let tau = step as f64 * TILT_SCAN_STEP;
        let rx = x_rotation(tau);
        let tilted = rotation * rx;
        let w1 = tilted.transpose() * n1;
        let w2 = tilted.transpose() * n2;
        if w1.z <= 1e-9 || w2.z <= 1e-9 {
            continue; // one surface stops being a graph over this chart
        }
        let k1 = -w1.y / w1.z;
        let k2 = w2.y / w2.z;
        if !(k1 > 0.0 && k2 > 0.0) {
            continue;
        }
        let product = k1 * k2;
        if product < best_product {
            best_product = product;
        }
        if k1 < 1.0 && k2 > 1.0 && product < 1.0 && best.map_or(true, |(_, _, bp)| product < bp) {
            best = Some((tau, k1, product));
        }
    }
    let Some((tau, _, _)) = best else {
        return Err(GeometryError::NoValidTilt { best: best_product });
    };
    let tilted_frame = Frame::new(rotation * x_rotation(tau), *p)?;
    let (r1, r2) = reexpand_pair(s1, s2, &tilted_frame)?;
    let k1 = r1.g().coeff(0, 1);
    let k2 = -r2.g().coeff(0, 1);
    Ok(TwoSurfaceFrame {
        frame: tilted_frame,
        s1: r1,
        s2: r2,
        normals: NormalizedNormals::Tilted { k1, k2, tilt: tau },
        angle_class: AngleClass::Obtuse,
    })
}

fn x_rotation(tau: f64) -> Matrix3<f64> {
    let (s, c) = tau.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn reexpand_pair(
    s1: &Surface,
    s2: &Surface,
    frame: &Frame,
) -> Result<(Surface, Surface), GeometryError> {
    let r1 = reexpand_surface(s1, frame)?;
    let r2 = reexpand_surface(s2, frame)?;
    Ok((r1, r2))
}

/// Re-expands `surface` as a graph over `frame` (a world placement). The
/// result keeps the original chart radius and carries `frame` as placement.
pub fn reexpand_surface(surface: &Surface, frame: &Frame) -> Result<Surface, GeometryError> {
    let rel_rot = surface.frame().rotation().transpose() * frame.rotation();
    let rel_origin = surface.frame().to_chart(frame.origin());
    let g = solve_graph(surface.g(), &rel_rot, &rel_origin, surface.g().order())?;
    Ok(Surface::new(g, frame.clone(), surface.chart_radius()))
}

/// Rigid motion within a surface chart taking `contact` to the origin and
/// `tangent` to the +u axis, plus the re-expanded graph `w = k(u, v)` with
/// vanishing constant and first-order terms. Both inputs are in the surface's
/// own chart coordinates.
pub fn reexpand_chart(
    surface: &Surface,
    contact: &Vector3<f64>,
    tangent: &Vector3<f64>,
) -> Result<(Frame, BivariateSeries), GeometryError> {
    let clearance = surface.clearance(contact);
    if clearance.abs() > ON_SURFACE_TOL {
        return Err(GeometryError::InvalidContact(format!(
            "contact is off the surface by {clearance:e}"
        )));
    }
    let n_hat = surface.normal_at(contact.x, contact.y).normalize();
    if tangent.norm() < 1e-12 {
        return Err(GeometryError::InvalidContact("tangent vector is zero".into()));
    }
    let t_raw = tangent / tangent.norm();
    let normal_part = t_raw.dot(&n_hat);
    if normal_part.abs() > 1e-6 {
        return Err(GeometryError::InvalidContact(format!(
            "tangent leaves the tangent plane (normal component {normal_part:e})"
        )));
    }
    let t_hat = (t_raw - n_hat * normal_part).normalize();
    let y_axis = n_hat.cross(&t_hat);
    let rotation = Matrix3::from_columns(&[t_hat, y_axis, n_hat]);
    let k = solve_graph(surface.g(), &rotation, contact, surface.g().order())?;
    // In-chart frame: chart_old = rotation * chart_new + contact.
    let frame = Frame::new(rotation, *contact)?;
    Ok((frame, k))
}

/// Solves `Z(q) = g(X(q), Y(q))` for the graph height `w(u, v)` of the same
/// surface over a new chart, where the new chart maps into the old one by
/// `p_old = rel_rot * p_new + rel_origin`. Degree-by-degree Newton iteration
/// with the Jacobian frozen at the new origin.
pub fn solve_graph(
    g: &BivariateSeries,
    rel_rot: &Matrix3<f64>,
    rel_origin: &Vector3<f64>,
    order: usize,
) -> Result<BivariateSeries, GeometryError> {
    let t = rel_origin;
    let height_gap = t.z - g.eval(t.x, t.y);
    if height_gap.abs() > ON_SURFACE_TOL {
        return Err(GeometryError::ImplicitSolveFailed(format!(
            "new chart origin misses the surface by {height_gap:e}"
        )));
    }
    let gx = g.partial(Axis::X);
    let gy = g.partial(Axis::Y);
    let (gx0, gy0) = (gx.eval(t.x, t.y), gy.eval(t.x, t.y));
    let jac = rel_rot[(2, 2)] - gx0 * rel_rot[(0, 2)] - gy0 * rel_rot[(1, 2)];
    if jac.abs() < 1e-8 {
        return Err(GeometryError::ImplicitSolveFailed(format!(
            "w-derivative {jac:e} too close to zero (surface vertical over new chart)"
        )));
    }

    let r = rel_rot;
    let mut w = BivariateSeries::zero(order);
    for _ in 1..=order {
        let residual = graph_residual(g, r, t, &w, order);
        let next = residual_leading_degree(&residual);
        let Some(d) = next else { break };
        let mut delta = BivariateSeries::zero(order);
        for (i, j, c) in residual.iter() {
            if i + j == d {
                delta.set_coeff(i, j, -c / jac);
            }
        }
        w = w.add(&delta);
    }
    Ok(w)
}

fn residual_leading_degree(residual: &BivariateSeries) -> Option<usize> {
    residual
        .iter()
        .filter(|&(_, _, c)| c.abs() > 1e-14)
        .map(|(i, j, _)| i + j)
        .min()
}

/// `Z - g(X, Y)` as a series in the new chart variables for the current
/// height iterate `w`.
fn graph_residual(
    g: &BivariateSeries,
    r: &Matrix3<f64>,
    t: &Vector3<f64>,
    w: &BivariateSeries,
    order: usize,
) -> BivariateSeries {
    let coord = |row: usize| {
        let mut s = w.scale(r[(row, 2)]);
        s.add_to_coeff(0, 0, t[row]);
        if order >= 1 {
            s.add_to_coeff(1, 0, r[(row, 0)]);
            s.add_to_coeff(0, 1, r[(row, 1)]);
        }
        s
    };
    let x_series = coord(0);
    let y_series = coord(1);
    let z_series = coord(2);

    let mut x_pows: Vec<BivariateSeries> = vec![BivariateSeries::constant(1.0, order)];
    let mut y_pows: Vec<BivariateSeries> = vec![BivariateSeries::constant(1.0, order)];
    for k in 1..=g.order().min(order) {
        x_pows.push(x_pows[k - 1].mul(&x_series));
        y_pows.push(y_pows[k - 1].mul(&y_series));
    }
    let mut composed = BivariateSeries::zero(order);
    for (i, j, c) in g.iter() {
        if i >= x_pows.len() || j >= y_pows.len() {
            continue;
        }
        let term = x_pows[i].mul(&y_pows[j]);
        for (a, b, tc) in term.iter() {
            composed.add_to_coeff(a, b, c * tc);
        }
    }
    z_series.sub(&composed)
}
