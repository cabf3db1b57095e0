//! Truncated power-series arithmetic in one and two variables.
//!
//! A [`BivariateSeries`] stores exact double coefficients for every monomial
//! `x^i y^j` with `i + j <= order`; everything absent is exactly zero. All
//! arithmetic truncates back to the working order, so pipelines built on top
//! (normal forms, chart re-expansions, implicit solves) are deterministic and
//! order-stable. Inputs are polynomials; truncation only loses information
//! when a rigid motion re-expands a series about a new point.

use std::collections::BTreeMap;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coefficients below this magnitude are treated as zero when hunting for
/// leading exponents. Arithmetic itself never thresholds.
pub const ZERO_THRESHOLD: f64 = 1e-11;

/// Minimum `|F_y(0,0)|` accepted by [`solve_implicit`].
pub const JACOBIAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("composition argument has nonzero constant term {0:e}")]
    NonzeroConstantTerm(f64),
    #[error("implicit solve requires |F_y(0,0)| >= {tol:e}, got {value:e}")]
    SingularJacobian { value: f64, tol: f64 },
    #[error("invalid series data: {0}")]
    InvalidInput(String),
}

/// Differentiation axis for [`BivariateSeries::partial`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Affine adjustment `c0 + cx*x + cy*y` added to the new graph height by
/// [`BivariateSeries::transform`]; used to cancel constant and tangent terms
/// after a rigid motion.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AffineZ {
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
}

impl AffineZ {
    pub const ZERO: AffineZ = AffineZ { c0: 0.0, cx: 0.0, cy: 0.0 };
}

/// Truncated power series in `(x, y)`.
///
/// Terms are keyed by `(total degree, i)`, which is also the fixed summation
/// order of [`eval`](Self::eval).
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSeries {
    order: usize,
    terms: BTreeMap<(u32, u32), f64>,
}

impl BivariateSeries {
    pub fn zero(order: usize) -> Self {
        BivariateSeries { order, terms: BTreeMap::new() }
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.set_coeff(0, 0, c);
        s
    }

    /// Builds a series from `(i, j, coefficient)` triples. Duplicate exponent
    /// pairs accumulate; terms beyond `order` are rejected.
    pub fn from_terms(order: usize, terms: &[(usize, usize, f64)]) -> Result<Self, SeriesError> {
        let mut s = Self::zero(order);
        for &(i, j, c) in terms {
            if i + j > order {
                return Err(SeriesError::InvalidInput(format!(
                    "term x^{i} y^{j} exceeds order {order}"
                )));
            }
            if !c.is_finite() {
                return Err(SeriesError::InvalidInput(format!(
                    "non-finite coefficient at ({i}, {j})"
                )));
            }
            s.add_to_coeff(i, j, c);
        }
        Ok(s)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.terms.get(&((i + j) as u32, i as u32)).copied().unwrap_or(0.0)
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, c: f64) {
        assert!(i + j <= self.order, "term beyond series order");
        let key = ((i + j) as u32, i as u32);
        if c == 0.0 {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, c);
        }
    }

    pub fn add_to_coeff(&mut self, i: usize, j: usize, c: f64) {
        let cur = self.coeff(i, j);
        self.set_coeff(i, j, cur + c);
    }

    /// Terms in ascending total degree, then ascending `i`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.terms.iter().map(|(&(d, i), &c)| (i as usize, (d - i) as usize, c))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Copies the series, dropping terms beyond `order`.
    pub fn truncated(&self, order: usize) -> Self {
        let mut out = Self::zero(order);
        for (i, j, c) in self.iter() {
            if i + j <= order {
                out.set_coeff(i, j, c);
            }
        }
        out
    }

    /// Sum of `c_ij x^i y^j` over stored terms in the fixed key order.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for (i, j, c) in self.iter() {
            acc += c * x.powi(i as i32) * y.powi(j as i32);
        }
        acc
    }

    /// Termwise derivative; the order drops by one.
    pub fn partial(&self, axis: Axis) -> BivariateSeries {
        let mut out = Self::zero(self.order.saturating_sub(1));
        for (i, j, c) in self.iter() {
            match axis {
                Axis::X if i > 0 => out.add_to_coeff(i - 1, j, c * i as f64),
                Axis::Y if j > 0 => out.add_to_coeff(i, j - 1, c * j as f64),
                _ => {}
            }
        }
        out
    }

    pub fn add(&self, rhs: &BivariateSeries) -> BivariateSeries {
        let order = self.order.min(rhs.order);
        let mut out = self.truncated(order);
        for (i, j, c) in rhs.iter() {
            if i + j <= order {
                out.add_to_coeff(i, j, c);
            }
        }
        out
    }

    pub fn sub(&self, rhs: &BivariateSeries) -> BivariateSeries {
        self.add(&rhs.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> BivariateSeries {
        let mut out = Self::zero(self.order);
        for (i, j, c) in self.iter() {
            out.set_coeff(i, j, c * k);
        }
        out
    }

    /// Product truncated to the smaller operand order.
    pub fn mul(&self, rhs: &BivariateSeries) -> BivariateSeries {
        let order = self.order.min(rhs.order);
        let mut out = Self::zero(order);
        for (i1, j1, c1) in self.iter() {
            if i1 + j1 > order {
                continue;
            }
            for (i2, j2, c2) in rhs.iter() {
                let (i, j) = (i1 + i2, j1 + j2);
                if i + j <= order {
                    out.add_to_coeff(i, j, c1 * c2);
                }
            }
        }
        out
    }

    /// `self^n` truncated to the series order.
    pub fn pow(&self, n: usize) -> BivariateSeries {
        let mut out = Self::constant(1.0, self.order);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Substitutes `y -> u(x)`, returning the univariate series of
    /// `x -> self(x, u(x))` through `min(self.order, u.order)`.
    ///
    /// `u` must vanish at the origin so the composition stays centered.
    pub fn compose_y(&self, u: &UnivariateSeries) -> Result<UnivariateSeries, SeriesError> {
        if u.coeff(0) != 0.0 {
            return Err(SeriesError::NonzeroConstantTerm(u.coeff(0)));
        }
        let order = self.order.min(u.order());
        // u^j has valuation >= j, so only j <= order contributes.
        let mut u_pows: Vec<UnivariateSeries> = Vec::with_capacity(order + 1);
        u_pows.push(UnivariateSeries::constant(1.0, order));
        for j in 1..=order {
            u_pows.push(u_pows[j - 1].mul(&u.truncated(order)));
        }
        let mut out = UnivariateSeries::zero(order);
        for (i, j, c) in self.iter() {
            if i + j > order || j > order {
                continue;
            }
            for k in 0..=order.saturating_sub(i) {
                let uc = u_pows[j].coeff(k);
                if uc != 0.0 {
                    out.add_to_coeff(i + k, c * uc);
                }
            }
        }
        Ok(out)
    }

    /// Re-expands the series under `(x, y) -> rot * (x, y) + shift`, then adds
    /// an affine height adjustment. The result is truncated to the original
    /// order; with a nonzero shift the tail beyond the order is lost, which is
    /// why chart boxes stay small.
    pub fn transform(&self, rot: &Matrix2<f64>, shift: (f64, f64), affine: &AffineZ) -> BivariateSeries {
        let order = self.order;
        let mut lx = Self::zero(order);
        let mut ly = Self::zero(order);
        if order >= 1 {
            lx.set_coeff(1, 0, rot[(0, 0)]);
            lx.set_coeff(0, 1, rot[(0, 1)]);
            ly.set_coeff(1, 0, rot[(1, 0)]);
            ly.set_coeff(0, 1, rot[(1, 1)]);
        }
        lx.set_coeff(0, 0, shift.0);
        ly.set_coeff(0, 0, shift.1);

        let mut lx_pows: Vec<BivariateSeries> = vec![Self::constant(1.0, order)];
        let mut ly_pows: Vec<BivariateSeries> = vec![Self::constant(1.0, order)];
        for k in 1..=order {
            lx_pows.push(lx_pows[k - 1].mul(&lx));
            ly_pows.push(ly_pows[k - 1].mul(&ly));
        }

        let mut out = Self::zero(order);
        for (i, j, c) in self.iter() {
            let term = lx_pows[i].mul(&ly_pows[j]);
            for (a, b, t) in term.iter() {
                out.add_to_coeff(a, b, c * t);
            }
        }
        out.add_to_coeff(0, 0, affine.c0);
        if order >= 1 {
            out.add_to_coeff(1, 0, affine.cx);
            out.add_to_coeff(0, 1, affine.cy);
        }
        out
    }

    /// Rotation-only convenience: `(x, y) -> R(theta) * (x, y)` with
    /// `R = [[cos, -sin], [sin, cos]]`.
    pub fn rotated(&self, theta: f64) -> BivariateSeries {
        let (s, c) = theta.sin_cos();
        let rot = Matrix2::new(c, -s, s, c);
        self.transform(&rot, (0.0, 0.0), &AffineZ::ZERO)
    }
}

/// Solves `F(x, phi(x)) = 0` for `phi` with `phi(0) = 0` through degree
/// `order`, by degree-by-degree Newton iteration on the coefficients with the
/// Jacobian frozen at `F_y(0,0)`.
pub fn solve_implicit(f: &BivariateSeries, order: usize) -> Result<UnivariateSeries, SeriesError> {
    let f0 = f.coeff(0, 0);
    if f0.abs() > ZERO_THRESHOLD {
        return Err(SeriesError::InvalidInput(format!(
            "F(0,0) = {f0:e} is not zero; implicit curve must pass through the origin"
        )));
    }
    let fy0 = f.coeff(0, 1);
    if fy0.abs() < JACOBIAN_TOLERANCE {
        return Err(SeriesError::SingularJacobian { value: fy0.abs(), tol: JACOBIAN_TOLERANCE });
    }
    let work = f.truncated(f.order().min(order + 1)).truncated(order.max(1));
    let mut phi = UnivariateSeries::zero(order);
    for n in 1..=order {
        let residual = work.compose_y(&phi.truncated(order))?;
        let r_n = residual.coeff(n);
        if r_n != 0.0 {
            phi.add_to_coeff(n, -r_n / fy0);
        }
    }
    Ok(phi)
}

/// Dense truncated power series in one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateSeries {
    coeffs: Vec<f64>,
}

impl UnivariateSeries {
    pub fn zero(order: usize) -> Self {
        UnivariateSeries { coeffs: vec![0.0; order + 1] }
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// Builds from `c0..` coefficients, truncating or zero-padding to `order`.
    pub fn from_coeffs(order: usize, coeffs: &[f64]) -> Self {
        let mut s = Self::zero(order);
        for (k, &c) in coeffs.iter().take(order + 1).enumerate() {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn set_coeff(&mut self, k: usize, c: f64) {
        assert!(k < self.coeffs.len(), "coefficient beyond series order");
        self.coeffs[k] = c;
    }

    pub fn add_to_coeff(&mut self, k: usize, c: f64) {
        self.coeffs[k] += c;
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Smallest index with `|c_k| > ZERO_THRESHOLD`, or `None` if every
    /// coefficient sits below the threshold.
    pub fn leading_exponent(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| c.abs() > ZERO_THRESHOLD)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> UnivariateSeries {
        if self.coeffs.len() == 1 {
            return Self::zero(0);
        }
        let mut out = Self::zero(self.order() - 1);
        for k in 1..self.coeffs.len() {
            out.coeffs[k - 1] = self.coeffs[k] * k as f64;
        }
        out
    }

    pub fn truncated(&self, order: usize) -> UnivariateSeries {
        let mut out = Self::zero(order);
        for k in 0..=order.min(self.order()) {
            out.coeffs[k] = self.coeffs[k];
        }
        out
    }

    pub fn add(&self, rhs: &UnivariateSeries) -> UnivariateSeries {
        let order = self.order().min(rhs.order());
        let mut out = Self::zero(order);
        for k in 0..=order {
            out.coeffs[k] = self.coeff(k) + rhs.coeff(k);
        }
        out
    }

    pub fn scale(&self, k: f64) -> UnivariateSeries {
        UnivariateSeries { coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    pub fn mul(&self, rhs: &UnivariateSeries) -> UnivariateSeries {
        let order = self.order().min(rhs.order());
        let mut out = Self::zero(order);
        for a in 0..=order {
            let ca = self.coeff(a);
            if ca == 0.0 {
                continue;
            }
            for b in 0..=order - a {
                let cb = rhs.coeff(b);
                if cb != 0.0 {
                    out.coeffs[a + b] += ca * cb;
                }
            }
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

// JSON term-list representation: {"order": 12, "terms": [{"i":2,"j":0,"c":1.0}, ...]}.

#[derive(Serialize, Deserialize)]
struct TermRepr {
    i: usize,
    j: usize,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    order: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for BivariateSeries {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = SeriesRepr {
            order: self.order,
            terms: self.iter().map(|(i, j, c)| TermRepr { i, j, c }).collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BivariateSeries {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = SeriesRepr::deserialize(deserializer)?;
        let mut s = BivariateSeries::zero(repr.order);
        let mut seen = std::collections::BTreeSet::new();
        for t in &repr.terms {
            if !seen.insert((t.i, t.j)) {
                return Err(D::Error::custom(format!("duplicate term ({}, {})", t.i, t.j)));
            }
            if t.i + t.j > repr.order {
                return Err(D::Error::custom(format!(
                    "term x^{} y^{} exceeds order {}",
                    t.i, t.j, repr.order
                )));
            }
            if !t.c.is_finite() {
                return Err(D::Error::custom(format!("non-finite coefficient at ({}, {})", t.i, t.j)));
            }
            s.set_coeff(t.i, t.j, t.c);
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(order: usize, terms: &[(usize, usize, f64)]) -> BivariateSeries {
        BivariateSeries::from_terms(order, terms).unwrap()
    }

    #[test]
    fn eval_polynomials() {
        let a = s(4, &[(2, 0, 1.0), (0, 2, -1.0)]);
        assert_eq!(a.eval(1.0, 2.0), -3.0);
        assert_eq!(BivariateSeries::zero(6).eval(3.0, -7.0), 0.0);
        let b = s(4, &[(3, 0, 1.0), (1, 1, 2.0)]);
        assert_eq!(b.eval(2.0, 0.5), 10.0);
    }

    #[test]
    fn partial_derivatives() {
        let a = s(3, &[(2, 1, 1.0)]);
        let ax = a.partial(Axis::X);
        assert_eq!(ax.coeff(1, 1), 2.0);
        assert_eq!(ax.order(), 2);
        let ay = a.partial(Axis::Y);
        assert_eq!(ay.coeff(2, 0), 1.0);
        let c = BivariateSeries::constant(5.0, 2);
        assert!(c.partial(Axis::X).is_zero());
    }

    #[test]
    fn compose_examples() {
        let g = s(8, &[(0, 1, 0.5), (2, 0, 1.0)]);
        let zero = UnivariateSeries::zero(8);
        let r = g.compose_y(&zero).unwrap();
        assert_eq!(r.coeff(2), 1.0);
        assert_eq!(r.coeff(1), 0.0);

        let g2 = s(8, &[(0, 2, 1.0)]);
        let u = UnivariateSeries::from_coeffs(8, &[0.0, 1.0]);
        let r2 = g2.compose_y(&u).unwrap();
        assert_eq!(r2.coeff(2), 1.0);

        let u3 = UnivariateSeries::from_coeffs(8, &[0.0, 0.0, 0.0, 1.0]);
        let r3 = g.compose_y(&u3).unwrap();
        assert_eq!(r3.coeff(2), 1.0);
        assert_eq!(r3.coeff(3), 0.5);
    }

    #[test]
    fn compose_rejects_offcenter_argument() {
        let g = s(4, &[(0, 1, 1.0)]);
        let u = UnivariateSeries::from_coeffs(4, &[0.5]);
        assert!(matches!(g.compose_y(&u), Err(SeriesError::NonzeroConstantTerm(_))));
    }

    #[test]
    fn solve_implicit_examples() {
        // F = y (k = 1/2 folded into the coefficient): phi == 0.
        let f = s(6, &[(0, 1, 1.0)]);
        let phi = solve_implicit(&f, 6).unwrap();
        assert!(phi.leading_exponent().is_none());

        // F = y - x^3.
        let f = s(6, &[(0, 1, 1.0), (3, 0, -1.0)]);
        let phi = solve_implicit(&f, 6).unwrap();
        assert_eq!(phi.leading_exponent(), Some(3));
        assert!((phi.coeff(3) - 1.0).abs() < 1e-14);

        // F = y - x^2 - y^2: phi = x^2 + x^4 + 2 x^6 through degree 6,
        // frozen after verifying the back-substitution residual vanishes.
        let f = s(6, &[(0, 1, 1.0), (2, 0, -1.0), (0, 2, -1.0)]);
        let phi = solve_implicit(&f, 6).unwrap();
        assert!((phi.coeff(2) - 1.0).abs() < 1e-13);
        assert!((phi.coeff(4) - 1.0).abs() < 1e-13);
        assert!((phi.coeff(6) - 2.0).abs() < 1e-13);
        let residual = f.compose_y(&phi).unwrap();
        assert!(residual.max_abs_coeff() < 1e-13);
    }

    #[test]
    fn solve_implicit_rejects_singular_jacobian() {
        let f = s(4, &[(2, 0, 1.0)]);
        assert!(matches!(solve_implicit(&f, 4), Err(SeriesError::SingularJacobian { .. })));
    }

    #[test]
    fn transform_examples() {
        let a = s(4, &[(2, 0, 1.0), (0, 2, -1.0)]);
        let r = a.rotated(std::f64::consts::FRAC_PI_4);
        assert!((r.coeff(1, 1) + 2.0).abs() < 1e-14);
        assert!(r.coeff(2, 0).abs() < 1e-14);
        assert!(r.coeff(0, 2).abs() < 1e-14);

        let id = a.transform(&Matrix2::identity(), (0.0, 0.0), &AffineZ::ZERO);
        assert_eq!(id, a);

        let x2 = s(4, &[(2, 0, 1.0)]);
        let r2 = x2.rotated(std::f64::consts::FRAC_PI_2);
        assert!((r2.coeff(0, 2) - 1.0).abs() < 1e-14);
        assert!(r2.coeff(2, 0).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let a = s(5, &[(2, 0, 1.0), (1, 1, -0.25)]);
        let text = serde_json::to_string(&a).unwrap();
        let back: BivariateSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);

        let dup = r#"{"order": 4, "terms": [{"i":1,"j":0,"c":1.0},{"i":1,"j":0,"c":2.0}]}"#;
        assert!(serde_json::from_str::<BivariateSeries>(dup).is_err());
        let beyond = r#"{"order": 2, "terms": [{"i":2,"j":1,"c":1.0}]}"#;
        assert!(serde_json::from_str::<BivariateSeries>(beyond).is_err());
    }

    fn arb_series(order: usize, decay: f64) -> impl Strategy<Value = BivariateSeries> {
        let n = (order + 1) * (order + 2) / 2;
        proptest::collection::vec(-1.0f64..1.0, n).prop_map(move |cs| {
            let mut s = BivariateSeries::zero(order);
            let mut idx = 0;
            for d in 0..=order {
                for i in 0..=d {
                    let c = cs[idx] * decay.powi(d as i32);
                    if c != 0.0 {
                        s.set_coeff(i, d - i, c);
                    }
                    idx += 1;
                }
            }
            s
        })
    }

    proptest! {
        #[test]
        fn mixed_partials_commute(a in arb_series(8, 1.0)) {
            // Exact equality needs the integer scalings c*i*j to be
            // representable in either order; quantize to dyadics with
            // mantissa headroom so no rounding happens.
            let mut q = BivariateSeries::zero(a.order());
            for (i, j, c) in a.iter() {
                q.set_coeff(i, j, (c * 1048576.0).round() / 1048576.0);
            }
            let xy = q.partial(Axis::X).partial(Axis::Y);
            let yx = q.partial(Axis::Y).partial(Axis::X);
            prop_assert_eq!(xy, yx);
        }

        #[test]
        fn rotation_round_trip(a in arb_series(8, 1.0), theta in -3.0f64..3.0) {
            let back = a.rotated(theta).rotated(-theta);
            let scale = a.max_abs_coeff().max(1.0);
            for (i, j, c) in a.iter() {
                prop_assert!((back.coeff(i, j) - c).abs() <= 1e-12 * scale);
            }
            for (i, j, c) in back.iter() {
                prop_assert!((a.coeff(i, j) - c).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn product_eval_matches(
            a in arb_series(5, 1.0),
            b in arb_series(5, 1.0),
            x in -0.5f64..0.5,
            y in -0.5f64..0.5,
        ) {
            // Degrees add to at most 10, so a 12th-order product is exact.
            let prod = a.truncated(12).mul(&b.truncated(12));
            let lhs = prod.eval(x, y);
            let rhs = a.eval(x, y) * b.eval(x, y);
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale);
        }

        #[test]
        fn implicit_solve_back_substitutes(
            raw in arb_series(9, 0.4),
            fy in prop_oneof![0.1f64..1.0, -1.0f64..-0.1],
        ) {
            // Keep the coefficient-to-Jacobian ratio below one so the solved
            // series stays O(1) and the absolute residual bound is meaningful.
            let mut f = raw.scale(0.2);
            f.set_coeff(0, 0, 0.0);
            f.set_coeff(0, 1, fy);
            let order = f.order();
            let phi = solve_implicit(&f, order).unwrap();
            let residual = f.compose_y(&phi).unwrap();
            prop_assert!(residual.max_abs_coeff() < 1e-9);
        }
    }
}
