//! Local case analysis at a boundary point: Hessian shape classification,
//! wedge decomposition of tangent directions at higher-order contact points,
//! the four saddle sub-cases along asymptote offsets, and the two-surface
//! decision tree. Every classification carries a predicted switch-point or
//! interval bound that the tracer and harness check empirically.

use nalgebra::{DMatrix, Matrix2, Vector3};
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{
    extract_normal_form, intersection_curve, two_surface_frame, AngleClass, Frame, GeometryError,
    IntersectionCurve, NormalForm, NormalizedNormals, Surface,
};
use crate::series::{BivariateSeries, ZERO_THRESHOLD};

/// Imaginary-part threshold below which a companion-matrix eigenvalue counts
/// as a real slope.
pub const REALNESS_TOL: f64 = 1e-9;
/// Roots closer than this are one slope (multiple-root deduplication).
pub const ROOT_CLUSTER_TOL: f64 = 1e-8;
/// Margin kept against the degenerate delta angles.
pub const DELTA_MARGIN: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("theta0 requires positive curvature magnitudes, got a = {0}, b = {1}")]
    NonPositiveInput(f64, f64),
    #[error("surface is not a saddle at the origin (shape {0:?})")]
    NotASaddle(SurfaceShape),
    #[error("delta {delta} outside the admissible wedge (|delta| < {max:.6})")]
    DeltaOutOfRange { delta: f64, max: f64 },
    #[error("surface is flat along the asymptote through the working order")]
    AsymptoteDegenerate,
    #[error("no nonvanishing homogeneous part within the working order")]
    ZeroForm,
    #[error("lowest homogeneous degree is {0}; wedge decomposition needs degree >= 2")]
    FormDegreeTooLow(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceShape {
    ConvexUp,
    ConcaveDown,
    Saddle,
    DegenerateHigherOrder,
}

/// Spectral data of the Hessian of `g` at the origin: `a >= b` are the
/// half-eigenvalues, so the rotated graph starts `a x^2 + b y^2 + ...`.
/// `rotation` is the orthogonal `P` with `P H P^T = diag(2a, 2b)`.
#[derive(Debug, Clone)]
pub struct HessianClass {
    pub a: f64,
    pub b: f64,
    pub rotation: Matrix2<f64>,
    pub shape: SurfaceShape,
}

impl HessianClass {
    /// Rotation to feed [`BivariateSeries::transform`] so the series lands in
    /// the diagonal frame (maps new coordinates to old ones).
    pub fn diagonalizing_rotation(&self) -> Matrix2<f64> {
        self.rotation.transpose()
    }
}

/// Classifies the origin of `z = g(x, y)` by the Hessian spectrum. Constant
/// and gradient terms are ignored; callers supply centered graphs.
pub fn hessian_classify(g: &BivariateSeries) -> HessianClass {
    let h11 = 2.0 * g.coeff(2, 0);
    let h12 = g.coeff(1, 1);
    let h22 = 2.0 * g.coeff(0, 2);
    let mid = 0.5 * (h11 + h22);
    let disc = (0.25 * (h11 - h22).powi(2) + h12 * h12).sqrt();
    let l1 = mid + disc;
    let l2 = mid - disc;

    let mut v1 = if h12.abs() > 1e-14 {
        nalgebra::Vector2::new(h12, l1 - h11).normalize()
    } else if h11 >= h22 {
        nalgebra::Vector2::new(1.0, 0.0)
    } else {
        nalgebra::Vector2::new(0.0, 1.0)
    };
    // Deterministic orientation for reproducible frames.
    if v1.x < 0.0 || (v1.x == 0.0 && v1.y < 0.0) {
        v1 = -v1;
    }
    let rotation = Matrix2::new(v1.x, v1.y, -v1.y, v1.x);

    let zero1 = l1.abs() <= ZERO_THRESHOLD;
    let zero2 = l2.abs() <= ZERO_THRESHOLD;
    let shape = if zero1 && zero2 {
        SurfaceShape::DegenerateHigherOrder
    } else if l1 > 0.0 && l2 < 0.0 && !zero1 && !zero2 {
        SurfaceShape::Saddle
    } else if l1 > ZERO_THRESHOLD {
        SurfaceShape::ConvexUp
    } else {
        SurfaceShape::ConcaveDown
    };
    HessianClass { a: 0.5 * l1, b: 0.5 * l2, rotation, shape }
}

/// Half-angle of the saddle asymptote wedge: `tan(theta0) = sqrt(a/b)` for
/// a graph opening `a x^2 - b y^2` with both magnitudes positive.
pub fn theta0(a: f64, b: f64) -> Result<f64, ClassifierError> {
    if a <= 0.0 || b <= 0.0 {
        return Err(ClassifierError::NonPositiveInput(a, b));
    }
    Ok((a / b).sqrt().atan())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormSign {
    Positive,
    Negative,
    MixedBoundary,
}

#[derive(Debug, Clone, Serialize)]
pub struct WedgeSector {
    /// Angular interval `[start, end)` in radians.
    pub start: f64,
    pub end: f64,
    pub sign: FormSign,
}

/// Zero lines of the lowest homogeneous part and the open sectors between
/// them. At most `2k` sectors for a degree-`k` form.
#[derive(Debug, Clone, Serialize)]
pub struct WedgeDecomposition {
    pub degree: usize,
    pub boundary_slopes: Vec<f64>,
    pub has_vertical: bool,
    pub sectors: Vec<WedgeSector>,
}

/// Splits tangent directions by the zero lines of the lowest nonvanishing
/// homogeneous part of `g`. Slopes come from companion-matrix eigenvalues of
/// `a_0 + a_1 m + ... + a_k m^k`, deduplicated within [`ROOT_CLUSTER_TOL`].
pub fn wedge_decompose(g: &BivariateSeries) -> Result<WedgeDecomposition, ClassifierError> {
    let mut degree = None;
    for d in 0..=g.order() {
        let max = (0..=d).map(|i| g.coeff(i, d - i).abs()).fold(0.0f64, f64::max);
        if max > ZERO_THRESHOLD {
            degree = Some(d);
            break;
        }
    }
    let Some(k) = degree else {
        return Err(ClassifierError::ZeroForm);
    };
    if k < 2 {
        return Err(ClassifierError::FormDegreeTooLow(k));
    }

    // a_j multiplies x^(k-j) y^j; substituting y = m x leaves sum a_j m^j.
    let coeffs: Vec<f64> = (0..=k).map(|j| g.coeff(k - j, j)).collect();
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut deg_m = k;
    while deg_m > 0 && coeffs[deg_m].abs() <= 1e-13 * scale {
        deg_m -= 1;
    }
    let has_vertical = deg_m < k;

    let mut slopes = real_roots(&coeffs[..=deg_m]);
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    slopes.dedup_by(|a, b| (*a - *b).abs() <= ROOT_CLUSTER_TOL * (1.0 + b.abs()));

    // Boundary rays over the full circle: each line contributes two.
    let mut line_angles: Vec<f64> = slopes.iter().map(|m| m.atan()).collect();
    if has_vertical {
        line_angles.push(std::f64::consts::FRAC_PI_2);
    }
    line_angles.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let form = |theta: f64| -> f64 {
        let (s, c) = theta.sin_cos();
        (0..=k).map(|j| coeffs[j] * c.powi((k - j) as i32) * s.powi(j as i32)).sum()
    };

    let sectors = if line_angles.is_empty() {
        let value = form(0.0);
        let sign = if value > 0.0 { FormSign::Positive } else { FormSign::Negative };
        vec![WedgeSector { start: 0.0, end: std::f64::consts::TAU, sign }]
    } else {
        let mut rays: Vec<f64> = line_angles
            .iter()
            .flat_map(|&a| [a, a + std::f64::consts::PI])
            .collect();
        rays.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut sectors = Vec::with_capacity(rays.len());
        for w in 0..rays.len() {
            let start = rays[w];
            let end = if w + 1 < rays.len() { rays[w + 1] } else { rays[0] + std::f64::consts::TAU };
            let value = form(0.5 * (start + end));
            let sign = if value > 1e-9 * scale.max(1.0) {
                FormSign::Positive
            } else if value < -1e-9 * scale.max(1.0) {
                FormSign::Negative
            } else {
                FormSign::MixedBoundary
            };
            sectors.push(WedgeSector { start, end, sign });
        }
        sectors
    };

    Ok(WedgeDecomposition { degree: k, boundary_slopes: slopes, has_vertical, sectors })
}

/// Real eigenvalues of the companion matrix of `c_0 + c_1 m + ... + c_d m^d`.
fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let d = coeffs.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    let lead = coeffs[d];
    let mut companion = DMatrix::<f64>::zeros(d, d);
    for r in 1..d {
        companion[(r, r - 1)] = 1.0;
    }
    for r in 0..d {
        companion[(r, d - 1)] = -coeffs[r] / lead;
    }
    companion
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() < REALNESS_TOL)
        .map(|z| z.re)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SaddleCase {
    Case1,
    Case2,
    Case3,
    Case4,
}

/// Saddle direction analysis at offset `delta` from the asymptote:
/// `a2` is the pure-x^2 coefficient in the delta-rotated frame, `leading`
/// the first pure-x coefficient (degree `n >= 3`) in the asymptote frame.
#[derive(Debug, Clone)]
pub struct SaddleClassification {
    pub theta0: f64,
    pub delta: f64,
    pub a2: f64,
    pub leading: f64,
    pub n: usize,
    pub case: SaddleCase,
    pub predicted_max_switch_points: u32,
    pub predicted_max_intervals: u32,
    /// Graph series in the asymptote frame (delta = 0).
    pub asymptote_frame: BivariateSeries,
    /// Graph series rotated by the additional delta.
    pub delta_frame: BivariateSeries,
}

/// Runs the saddle pipeline: diagonalize, rotate the positive asymptote to
/// the +x axis (the frame where the mixed coefficient is `-2 sqrt(ab)`),
/// rotate by `delta`, and classify by the signs of `a2(delta)` and the
/// leading asymptote coefficient.
///
/// On the asymptote itself (`a2` within [`ZERO_THRESHOLD`] of zero) the sign
/// of the leading coefficient alone decides: positive curls the surface up
/// along the ray (Case 1 bound), negative drops it away (Case 2 bound).
pub fn saddle_case(
    g: &BivariateSeries,
    delta: f64,
) -> Result<SaddleClassification, ClassifierError> {
    let hc = hessian_classify(g);
    if hc.shape != SurfaceShape::Saddle {
        return Err(ClassifierError::NotASaddle(hc.shape));
    }
    let (a, b_mag) = (hc.a, -hc.b);
    let th0 = theta0(a, b_mag)?;
    let max_delta = (2.0 * th0).min(std::f64::consts::PI - 2.0 * th0) - DELTA_MARGIN;
    if delta.abs() >= max_delta {
        return Err(ClassifierError::DeltaOutOfRange { delta, max: max_delta });
    }

    let diag = g.transform(
        &hc.diagonalizing_rotation(),
        (0.0, 0.0),
        &crate::series::AffineZ::ZERO,
    );
    let asymptote_frame = diag.rotated(th0);

    let mut leading_term = None;
    for i in 3..=asymptote_frame.order() {
        let c = asymptote_frame.coeff(i, 0);
        if c.abs() > ZERO_THRESHOLD {
            leading_term = Some((i, c));
            break;
        }
    }
    let Some((n, leading)) = leading_term else {
        return Err(ClassifierError::AsymptoteDegenerate);
    };

    let delta_frame = asymptote_frame.rotated(delta);
    let a2 = delta_frame.coeff(2, 0);

    let case = if a2 > ZERO_THRESHOLD {
        if leading > 0.0 {
            SaddleCase::Case1
        } else {
            SaddleCase::Case4
        }
    } else if a2 < -ZERO_THRESHOLD {
        if leading > 0.0 {
            SaddleCase::Case3
        } else {
            SaddleCase::Case2
        }
    } else if leading > 0.0 {
        SaddleCase::Case1
    } else {
        SaddleCase::Case2
    };
    let (sp, iv) = match case {
        SaddleCase::Case1 => (1, 1),
        SaddleCase::Case2 => (0, 1),
        SaddleCase::Case3 => (2, 2),
        SaddleCase::Case4 => (1, 1),
    };

    Ok(SaddleClassification {
        theta0: th0,
        delta,
        a2,
        leading,
        n,
        case,
        predicted_max_switch_points: sp,
        predicted_max_intervals: iv,
        asymptote_frame,
        delta_frame,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoSurfaceCase {
    TrivialBothFlat,
    TrivialOneFlat,
    TrivialPhiZero,
    MltNReduces,
    NneqNtildeReduces,
    NegativeLeadingReduces,
    MainAlternating,
}

/// What a classification promises about traces near the base point.
#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    /// Hard integer bound when one exists.
    pub bound: Option<u32>,
    /// What the bound counts.
    pub counts: BoundKind,
    pub note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    SwitchPoints,
    Intervals,
    Qualitative,
}

/// Full two-surface local classification in the normalized frame.
#[derive(Debug, Clone)]
pub struct TwoSurfaceClassification {
    pub frame: Frame,
    pub angle_class: AngleClass,
    pub normals: NormalizedNormals,
    /// Surfaces re-expanded over the normalized chart; ready for tracing.
    pub s1: Surface,
    pub s2: Surface,
    pub curve: IntersectionCurve,
    pub nf1: NormalForm,
    pub nf2: NormalForm,
    pub case: TwoSurfaceCase,
    pub prediction: Prediction,
}

/// Normalizes the pair at `p` (world coordinates) and walks the decision
/// tree: flat-intersection trivial cases first, then the vanishing curve,
/// then the order comparisons `M` vs `N` vs `N~`, then the leading signs.
/// Every transversal configuration receives exactly one label.
pub fn classify_two_surfaces(
    s1: &Surface,
    s2: &Surface,
    p: &Vector3<f64>,
) -> Result<TwoSurfaceClassification, ClassifierError> {
    let tsf = two_surface_frame(s1, s2, p)?;
    let curve = intersection_curve(&tsf.s1, &tsf.s2)?;
    let nf1 = extract_normal_form(&tsf.s1)?;
    let nf2 = extract_normal_form(&tsf.s2)?;

    let (case, prediction) = match (nf1.n, nf2.n, curve.m) {
        (None, None, _) => (
            TwoSurfaceCase::TrivialBothFlat,
            Prediction {
                bound: Some(0),
                counts: BoundKind::SwitchPoints,
                note: "both surfaces flat along the tangent; the geodesic is a line segment at the beginning".into(),
            },
        ),
        (None, Some(_), _) => (
            TwoSurfaceCase::TrivialOneFlat,
            Prediction {
                bound: None,
                counts: BoundKind::Qualitative,
                note: "geodesic does not touch surface 1 near the origin; single-obstacle regime on surface 2".into(),
            },
        ),
        (Some(_), None, _) => (
            TwoSurfaceCase::TrivialOneFlat,
            Prediction {
                bound: None,
                counts: BoundKind::Qualitative,
                note: "geodesic does not touch surface 2 near the origin; single-obstacle regime on surface 1".into(),
            },
        ),
        (Some(_), Some(_), None) => (
            TwoSurfaceCase::TrivialPhiZero,
            Prediction {
                bound: None,
                counts: BoundKind::Qualitative,
                note: "intersection projects to the tangent axis; crossings cannot repeat, single-obstacle regime".into(),
            },
        ),
        (Some(n1), Some(n2), Some(m)) => {
            if m < n1.min(n2) {
                (
                    TwoSurfaceCase::MltNReduces,
                    Prediction {
                        bound: None,
                        counts: BoundKind::Qualitative,
                        note: "curve order below both surface orders; bouncing stops, single-obstacle regime".into(),
                    },
                )
            } else if n1 != n2 {
                (
                    TwoSurfaceCase::NneqNtildeReduces,
                    Prediction {
                        bound: None,
                        counts: BoundKind::Qualitative,
                        note: "surface orders differ; bouncing stops, single-obstacle regime".into(),
                    },
                )
            } else if nf1.a00 < 0.0 || nf2.a00 < 0.0 {
                (
                    TwoSurfaceCase::NegativeLeadingReduces,
                    Prediction {
                        bound: None,
                        counts: BoundKind::Qualitative,
                        note: "a leading coefficient is negative; no switch point on that surface nearby, single-obstacle regime".into(),
                    },
                )
            } else {
                (
                    TwoSurfaceCase::MainAlternating,
                    Prediction {
                        bound: None,
                        counts: BoundKind::Qualitative,
                        note: "finitely many switch points, no accumulation; boundary segments alternate surfaces across each interval; eventually a single-obstacle or line regime".into(),
                    },
                )
            }
        }
    };

    Ok(TwoSurfaceClassification {
        frame: tsf.frame,
        angle_class: tsf.angle_class,
        normals: tsf.normals,
        s1: tsf.s1,
        s2: tsf.s2,
        curve,
        nf1,
        nf2,
        case,
        prediction,
    })
}

/// A classification that predicts a trace bound near its base point.
pub trait PredictBound {
    fn predict_bound(&self) -> Prediction;
}

impl PredictBound for HessianClass {
    fn predict_bound(&self) -> Prediction {
        match self.shape {
            SurfaceShape::ConvexUp => Prediction {
                bound: Some(1),
                counts: BoundKind::SwitchPoints,
                note: "at most one switch point near the base point".into(),
            },
            SurfaceShape::ConcaveDown => Prediction {
                bound: Some(0),
                counts: BoundKind::SwitchPoints,
                note: "no switch point near the base point".into(),
            },
            SurfaceShape::Saddle => Prediction {
                bound: Some(2),
                counts: BoundKind::Intervals,
                note: "at most two complete or partial line segments in a small ball, uniformly over directions".into(),
            },
            SurfaceShape::DegenerateHigherOrder => Prediction {
                bound: None,
                counts: BoundKind::Qualitative,
                note: "degree-k lowest form: at most 2k direction sectors, each with a single-surface bound".into(),
            },
        }
    }
}

impl PredictBound for SaddleClassification {
    fn predict_bound(&self) -> Prediction {
        Prediction {
            bound: Some(2),
            counts: BoundKind::Intervals,
            note: format!(
                "{:?}: at most {} switch point(s) and {} interval(s) along this direction; global saddle bound is two intervals",
                self.case, self.predicted_max_switch_points, self.predicted_max_intervals
            ),
        }
    }
}

impl PredictBound for TwoSurfaceClassification {
    fn predict_bound(&self) -> Prediction {
        self.prediction.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Surface;
    use proptest::prelude::*;

    fn series(order: usize, terms: &[(usize, usize, f64)]) -> BivariateSeries {
        BivariateSeries::from_terms(order, terms).unwrap()
    }

    #[test]
    fn hessian_examples() {
        let hc = hessian_classify(&series(4, &[(2, 0, 3.0), (1, 1, 1.0), (0, 2, 3.0)]));
        assert!((2.0 * hc.a - 7.0).abs() < 1e-12);
        assert!((2.0 * hc.b - 5.0).abs() < 1e-12);
        assert_eq!(hc.shape, SurfaceShape::ConvexUp);

        let hc = hessian_classify(&series(4, &[(2, 0, 1.0), (0, 2, -1.0)]));
        assert_eq!(hc.shape, SurfaceShape::Saddle);
        assert!((hc.a - 1.0).abs() < 1e-12);
        assert!((hc.b + 1.0).abs() < 1e-12);

        let hc = hessian_classify(&series(4, &[(3, 0, 1.0)]));
        assert_eq!(hc.shape, SurfaceShape::DegenerateHigherOrder);

        let hc = hessian_classify(&series(4, &[(2, 0, -2.0), (0, 2, -0.5)]));
        assert_eq!(hc.shape, SurfaceShape::ConcaveDown);
    }

    #[test]
    fn hessian_diagonalizes() {
        let g = series(4, &[(2, 0, 1.3), (1, 1, -0.8), (0, 2, 0.4)]);
        let hc = hessian_classify(&g);
        let h = Matrix2::new(2.0 * g.coeff(2, 0), g.coeff(1, 1), g.coeff(1, 1), 2.0 * g.coeff(0, 2));
        let d = hc.rotation * h * hc.rotation.transpose();
        assert!(d[(0, 1)].abs() < 1e-10 && d[(1, 0)].abs() < 1e-10);
        assert!((d[(0, 0)] - 2.0 * hc.a).abs() < 1e-10);
        assert!((d[(1, 1)] - 2.0 * hc.b).abs() < 1e-10);
    }

    #[test]
    fn theta0_examples() {
        use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
        assert!((theta0(1.0, 1.0).unwrap() - FRAC_PI_4).abs() < 1e-14);
        assert!((theta0(3.0, 1.0).unwrap() - FRAC_PI_3).abs() < 1e-14);
        assert!((theta0(1.0, 3.0).unwrap() - FRAC_PI_6).abs() < 1e-14);
        assert!(theta0(-1.0, 1.0).is_err());
    }

    #[test]
    fn wedge_examples() {
        let w = wedge_decompose(&series(6, &[(2, 0, 1.0), (0, 2, -1.0)])).unwrap();
        assert_eq!(w.degree, 2);
        assert_eq!(w.boundary_slopes.len(), 2);
        assert!((w.boundary_slopes[0] + 1.0).abs() < 1e-9);
        assert!((w.boundary_slopes[1] - 1.0).abs() < 1e-9);
        assert!(!w.has_vertical);
        assert_eq!(w.sectors.len(), 4);
        let signs: Vec<_> = w.sectors.iter().map(|s| s.sign).collect();
        for pair in signs.windows(2) {
            assert_ne!(pair[0], pair[1], "alternating signs");
        }

        // x^3 - 3 x y^2 = x (x - sqrt(3) y)(x + sqrt(3) y): slopes +-1/sqrt(3)
        // plus the vertical direction; 6 = 2k sectors.
        let w = wedge_decompose(&series(6, &[(3, 0, 1.0), (1, 2, -3.0)])).unwrap();
        assert_eq!(w.degree, 3);
        assert!(w.has_vertical);
        assert_eq!(w.boundary_slopes.len(), 2);
        let inv_sqrt3 = 1.0 / 3f64.sqrt();
        assert!((w.boundary_slopes[0] + inv_sqrt3).abs() < 1e-9);
        assert!((w.boundary_slopes[1] - inv_sqrt3).abs() < 1e-9);
        assert_eq!(w.sectors.len(), 6);

        let w = wedge_decompose(&series(6, &[(2, 0, 1.0), (0, 2, 1.0)])).unwrap();
        assert!(w.boundary_slopes.is_empty());
        assert_eq!(w.sectors.len(), 1);
        assert_eq!(w.sectors[0].sign, FormSign::Positive);

        assert!(matches!(
            wedge_decompose(&BivariateSeries::zero(6)),
            Err(ClassifierError::ZeroForm)
        ));
        assert!(matches!(
            wedge_decompose(&series(6, &[(1, 0, 1.0)])),
            Err(ClassifierError::FormDegreeTooLow(1))
        ));
    }

    #[test]
    fn saddle_a2_closed_form() {
        // For a pure quadratic saddle a x^2 - b y^2 the delta-frame x^2
        // coefficient is b cos^2(theta0 + delta) / cos^2(theta0) - b.
        for &(a, b) in &[(1.0, 1.0), (1.0, 3.0), (2.0, 1.0), (0.7, 2.2)] {
            let g = series(8, &[(2, 0, a), (0, 2, -b), (4, 0, 0.3)]);
            let th0 = theta0(a, b).unwrap();
            for &delta in &[-0.2f64, -0.05, 0.0, 0.05, 0.2] {
                if delta.abs() >= (2.0 * th0).min(std::f64::consts::PI - 2.0 * th0) - 1e-3 {
                    continue;
                }
                let sc = saddle_case(&g, delta).unwrap();
                let expected = b * (th0 + delta).cos().powi(2) / th0.cos().powi(2) - b;
                assert!(
                    (sc.a2 - expected).abs() < 1e-10,
                    "a={a} b={b} delta={delta}: {} vs {expected}",
                    sc.a2
                );
            }
        }
    }

    #[test]
    fn saddle_a2_vanishes_on_asymptote() {
        let g = series(8, &[(2, 0, 1.0), (0, 2, -1.0), (3, 0, 0.4), (1, 2, -0.3)]);
        let sc = saddle_case(&g, 0.0).unwrap();
        assert!(sc.a2.abs() < 1e-12);
    }

    /// Builds a surface whose asymptote frame is handwritten, by pulling the
    /// series back through the minus-theta0 rotation.
    fn from_asymptote_frame(a: f64, b: f64, extra: &[(usize, usize, f64)]) -> BivariateSeries {
        let th0 = theta0(a, b).unwrap();
        let mut terms = vec![(1, 1, -2.0 * (a * b).sqrt()), (0, 2, a - b)];
        terms.extend_from_slice(extra);
        series(10, &terms).rotated(-th0)
    }

    #[test]
    fn saddle_cases_from_constructed_frames() {
        // Leading +1 at delta < 0 gives a2 > 0: Case 1.
        let g = from_asymptote_frame(1.0, 1.0, &[(3, 0, 1.0)]);
        let sc = saddle_case(&g, -0.05).unwrap();
        assert_eq!(sc.case, SaddleCase::Case1);
        assert!(sc.a2 > 0.0 && sc.leading > 0.0);
        assert_eq!(sc.predicted_max_switch_points, 1);
        assert!((sc.leading - 1.0).abs() < 1e-9);
        assert_eq!(sc.n, 3);

        // Leading -1 at delta > 0 gives a2 < 0: Case 2, a straight line.
        let g = from_asymptote_frame(1.0, 1.0, &[(3, 0, -1.0)]);
        let sc = saddle_case(&g, 0.05).unwrap();
        assert_eq!(sc.case, SaddleCase::Case2);
        assert_eq!(sc.predicted_max_switch_points, 0);

        let g = from_asymptote_frame(1.0, 2.0, &[(3, 0, 0.8)]);
        let sc = saddle_case(&g, 0.05).unwrap();
        assert_eq!(sc.case, SaddleCase::Case3);
        assert_eq!(sc.predicted_max_switch_points, 2);

        let g = from_asymptote_frame(2.0, 1.0, &[(3, 0, -0.8)]);
        let sc = saddle_case(&g, -0.05).unwrap();
        assert_eq!(sc.case, SaddleCase::Case4);
        assert_eq!(sc.predicted_max_intervals, 1);
    }

    #[test]
    fn saddle_rejections() {
        let bowl = series(6, &[(2, 0, 1.0), (0, 2, 1.0)]);
        assert!(matches!(saddle_case(&bowl, 0.0), Err(ClassifierError::NotASaddle(_))));

        let g = series(6, &[(2, 0, 1.0), (0, 2, -1.0), (3, 0, 0.5)]);
        assert!(matches!(
            saddle_case(&g, 2.0),
            Err(ClassifierError::DeltaOutOfRange { .. })
        ));

        // Pure quadratic saddle: flat along the asymptote.
        let g = series(6, &[(2, 0, 1.0), (0, 2, -1.0)]);
        assert!(matches!(saddle_case(&g, 0.05), Err(ClassifierError::AsymptoteDegenerate)));
    }

    fn surf(terms: &[(usize, usize, f64)]) -> Surface {
        Surface::from_series(series(8, terms))
    }

    #[test]
    fn two_surface_examples() {
        let g = surf(&[(0, 1, 0.5), (2, 0, 1.0)]);
        let h = surf(&[(0, 1, -0.5), (2, 0, 1.0), (3, 0, 1.0)]);
        let c = classify_two_surfaces(&g, &h, &Vector3::zeros()).unwrap();
        assert_eq!(c.case, TwoSurfaceCase::MainAlternating);
        assert_eq!(c.curve.m, Some(3));
        assert!((c.curve.a_m - 1.0).abs() < 1e-10);
        assert_eq!(c.nf1.n, Some(2));
        assert_eq!(c.nf2.n, Some(2));
        assert!((c.nf1.a00 - 1.0).abs() < 1e-10);
        assert!((c.nf2.a00 - 1.0).abs() < 1e-10);

        let g = surf(&[(0, 1, 0.5), (1, 1, 1.0)]);
        let h = surf(&[(0, 1, -0.5), (2, 0, 1.0)]);
        let c = classify_two_surfaces(&g, &h, &Vector3::zeros()).unwrap();
        assert_eq!(c.case, TwoSurfaceCase::TrivialOneFlat);
        assert!(c.prediction.note.contains("does not touch surface 1"));

        let g = surf(&[(0, 1, 0.5), (2, 0, 1.0)]);
        let h = surf(&[(0, 1, -0.5), (2, 0, 1.0)]);
        let c = classify_two_surfaces(&g, &h, &Vector3::zeros()).unwrap();
        assert_eq!(c.case, TwoSurfaceCase::TrivialPhiZero);
    }

    #[test]
    fn two_surface_reduction_labels() {
        // Different surface orders N = 2, Ntilde = 3 (the curve order equals
        // the smaller of the two, so the order-mismatch branch decides).
        let g = surf(&[(0, 1, 0.5), (2, 0, 1.0)]);
        let h = surf(&[(0, 1, -0.5), (3, 0, 1.0)]);
        let c = classify_two_surfaces(&g, &h, &Vector3::zeros()).unwrap();
        assert_eq!(c.case, TwoSurfaceCase::NneqNtildeReduces);
        assert_eq!(c.curve.m, Some(2));
        assert_eq!((c.nf1.n, c.nf2.n), (Some(2), Some(3)));

        let g = surf(&[(0, 1, 0.5), (4, 0, 1.0), (0, 2, 0.3)]);
        let h = surf(&[(0, 1, -0.5), (2, 0, 1.0), (4, 0, 0.5)]);
        let c = classify_two_surfaces(&g, &h, &Vector3::zeros()).unwrap();
        assert_eq!(c.case, TwoSurfaceCase::NneqNtildeReduces);
        assert_eq!((c.nf1.n, c.nf2.n), (Some(4), Some(2)));

        let g = surf(&[(0, 1, 0.5), (2, 0, -1.0), (3, 0, 1.0)]);
        let h = surf(&[(0, 1, -0.5), (2, 0, -1.0)]);
        let c = classify_two_surfaces(&g, &h, &Vector3::zeros()).unwrap();
        assert_eq!(c.case, TwoSurfaceCase::NegativeLeadingReduces);
    }

    #[test]
    fn predict_bound_examples() {
        let up = hessian_classify(&series(4, &[(2, 0, 1.0), (0, 2, 1.0)]));
        assert_eq!(up.predict_bound().bound, Some(1));
        let down = hessian_classify(&series(4, &[(2, 0, -1.0), (0, 2, -1.0)]));
        assert_eq!(down.predict_bound().bound, Some(0));
        let g = from_asymptote_frame(1.0, 1.0, &[(3, 0, 1.0)]);
        let sc = saddle_case(&g, -0.05).unwrap();
        assert_eq!(sc.predict_bound().bound, Some(2));
        assert_eq!(sc.predict_bound().counts, BoundKind::Intervals);
    }

    proptest! {
        #[test]
        fn wedge_sector_bound(coeffs in proptest::collection::vec(-1.0f64..1.0, 3..=7)) {
            let k = coeffs.len() - 1;
            let mut terms = Vec::new();
            for (j, &c) in coeffs.iter().enumerate() {
                terms.push((k - j, j, c));
            }
            let g = series(8, &terms);
            match wedge_decompose(&g) {
                Ok(w) => prop_assert!(w.sectors.len() <= 2 * k),
                Err(ClassifierError::ZeroForm) => {}
                Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
            }
        }

        #[test]
        fn shape_is_rotation_invariant(
            c20 in -1.0f64..1.0,
            c11 in -1.0f64..1.0,
            c02 in -1.0f64..1.0,
            theta in -3.0f64..3.0,
        ) {
            let g = series(4, &[(2, 0, c20), (1, 1, c11), (0, 2, c02)]);
            // Near-degenerate spectra may flip across the zero threshold
            // under rotation round-off; skip the knife-edge cases.
            let disc = (0.25 * (2.0 * c20 - 2.0 * c02).powi(2) + c11 * c11).sqrt();
            let l_small = ((c20 + c02).abs() - disc).abs();
            prop_assume!(l_small > 1e-6);
            let base = hessian_classify(&g).shape;
            let rotated = hessian_classify(&g.rotated(theta)).shape;
            prop_assert_eq!(base, rotated);
        }
    }
}
