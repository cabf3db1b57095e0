//! Event-driven unit-speed geodesic integration in a chart. Boundary
//! segments ride a surface with acceleration along the outward normal
//! `(-g_x, -g_y, 1)`; interior segments are straight lines. Events (liftoff,
//! contact, grazing, ball or chart exit) are localized by bisection; the
//! integrator itself is a cheap fixed-step RK4 with projection back onto the
//! surface after every step.
//!
//! At a tangential contact both continuations (attach and ride, or continue
//! straight) can be locally shortest; which branch a shooting trace takes is
//! a policy choice. The default follows the clearance test (attach only when
//! the straight continuation would penetrate the obstacle); setting
//! [`TraceLimits::attach_on_graze`] realizes the wrapping branch at feasible
//! grazes instead, which is what the switch-point experiments exercise.

use nalgebra::Vector3;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::geometry::Surface;
use crate::series::UnivariateSeries;

/// Default integrator step in arc length.
pub const DEFAULT_DS: f64 = 1e-4;
/// Required normal acceleration below this triggers departure.
pub const LIFTOFF_TOL: f64 = 1e-9;
/// Events are bisected to this resolution in arc length.
pub const EVENT_TOL_S: f64 = 1e-10;
/// Clearance slope threshold separating grazing from transversal contact.
pub const TANGENCY_TOL: f64 = 1e-6;
/// Arc-length deadband after a departure before contacts are searched.
pub const DEADBAND: f64 = 1e-6;
/// A clearance minimum this close to zero counts as a grazing touch.
pub const GRAZE_TOL: f64 = 1e-9;
/// Clearance below this negative value counts as penetration.
const PENETRATION_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum TracerError {
    #[error("inconsistent initial state: {0}")]
    InconsistentInitialState(String),
    #[error("shooting did not converge: terminal miss {miss:e} above tolerance {tol:e}")]
    NonConverged { miss: f64, tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    OnSurface(usize),
    Interior,
}

#[derive(Debug, Clone, Copy)]
pub struct GeodesicState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub mode: Mode,
    pub s: f64,
}

impl GeodesicState {
    /// On-surface state at chart point `(x, y)` with tangent direction at
    /// angle `theta` in the chart plane.
    pub fn on_surface(surfaces: &[Surface], index: usize, x: f64, y: f64, theta: f64) -> Self {
        let surface = &surfaces[index];
        let grad = surface.gradient(x, y);
        let (sin, cos) = theta.sin_cos();
        let v = Vector3::new(cos, sin, grad.x * cos + grad.y * sin).normalize();
        GeodesicState {
            position: Vector3::new(x, y, surface.height(x, y)),
            velocity: v,
            mode: Mode::OnSurface(index),
            s: 0.0,
        }
    }

    pub fn interior(position: Vector3<f64>, velocity: Vector3<f64>) -> Self {
        GeodesicState {
            position,
            velocity: velocity.normalize(),
            mode: Mode::Interior,
            s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "surface")]
pub enum SegmentKind {
    Boundary(usize),
    Line,
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub kind: SegmentKind,
    pub s_start: f64,
    pub s_end: f64,
    pub start: Vector3<f64>,
    pub end: Vector3<f64>,
    /// Projected slope dy/dx at the start of an interior segment.
    pub line_slope_t: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SwitchPoint {
    pub s: f64,
    pub point: Vector3<f64>,
    pub from_kind: SegmentKind,
    pub to_kind: SegmentKind,
    pub velocity: Vector3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ExitedBall,
    MaxSegments,
    TransversalImpact,
    LeftChart,
    StepLimit,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceLimits {
    pub max_segments: usize,
    pub max_steps: usize,
    pub ds: f64,
    /// Attach at feasible grazing contacts instead of continuing straight.
    pub attach_on_graze: bool,
    /// Record every n-th integration step into `samples`.
    pub sample_stride: usize,
}

impl Default for TraceLimits {
    fn default() -> Self {
        TraceLimits {
            max_segments: 64,
            max_steps: 2_000_000,
            ds: DEFAULT_DS,
            attach_on_graze: false,
            sample_stride: 16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub s: f64,
    pub position: Vector3<f64>,
    pub kind: SegmentKind,
}

#[derive(Debug, Clone)]
pub struct TraceResult {
    pub segments: Vec<Segment>,
    pub switch_points: Vec<SwitchPoint>,
    pub termination: Termination,
    pub eps: f64,
    pub limits: TraceLimits,
    /// Ball center (the initial position).
    pub origin: Vector3<f64>,
    pub final_state: GeodesicState,
    pub samples: Vec<Sample>,
    /// Degenerate events worth surfacing (stalled tangencies, blocked
    /// departures); empty for clean traces.
    pub flags: Vec<String>,
}

impl TraceResult {
    pub fn interval_count(&self) -> usize {
        self.segments.iter().filter(|s| s.kind == SegmentKind::Line).count()
    }

    pub fn switch_count(&self) -> usize {
        self.switch_points.len()
    }

    pub fn to_json(&self) -> Value {
        let seg = |s: &Segment| -> Value {
            let mut v = json!({
                "s0": s.s_start,
                "s1": s.s_end,
                "p0": [s.start.x, s.start.y, s.start.z],
                "p1": [s.end.x, s.end.y, s.end.z],
            });
            match s.kind {
                SegmentKind::Boundary(i) => {
                    v["kind"] = json!("boundary");
                    v["surface"] = json!(i + 1);
                }
                SegmentKind::Line => {
                    v["kind"] = json!("line");
                    if let Some(t) = s.line_slope_t {
                        v["slope_t"] = json!(t);
                    }
                }
            }
            v
        };
        let sw = |p: &SwitchPoint| -> Value {
            let kind_json = |k: SegmentKind| match k {
                SegmentKind::Boundary(i) => json!({"kind": "boundary", "surface": i + 1}),
                SegmentKind::Line => json!({"kind": "line"}),
            };
            json!({
                "s": p.s,
                "point": [p.point.x, p.point.y, p.point.z],
                "from": kind_json(p.from_kind),
                "to": kind_json(p.to_kind),
                "velocity": [p.velocity.x, p.velocity.y, p.velocity.z],
            })
        };
        json!({
            "segments": self.segments.iter().map(seg).collect::<Vec<_>>(),
            "switch_points": self.switch_points.iter().map(sw).collect::<Vec<_>>(),
            "termination": serde_json::to_value(self.termination).unwrap(),
            "eps": self.eps,
            "limits": serde_json::to_value(&self.limits).unwrap(),
            "origin": [self.origin.x, self.origin.y, self.origin.z],
            "samples": self
                .samples
                .iter()
                .map(|sm| json!([sm.s, sm.position.x, sm.position.y, sm.position.z]))
                .collect::<Vec<_>>(),
            "flags": self.flags,
        })
    }

    /// Segment kind covering arc length `s` (for sample labelling).
    pub fn kind_at(&self, s: f64) -> Option<SegmentKind> {
        self.segments
            .iter()
            .find(|seg| s >= seg.s_start && s <= seg.s_end)
            .map(|seg| seg.kind)
    }
}

/// Acceleration of a unit-speed curve constrained to the surface:
/// `z'' = (g_xx vx^2 + 2 g_xy vx vy + g_yy vy^2) / (1 + g_x^2 + g_y^2)`
/// along the unnormalized outward normal. Returns `(gamma'', z''-scalar)`.
pub fn surface_accel(
    surface: &Surface,
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
) -> (Vector3<f64>, f64) {
    let grad = surface.gradient(x, y);
    let q = surface.hessian_form(x, y, vx, vy);
    let scalar = q / (1.0 + grad.x * grad.x + grad.y * grad.y);
    (Vector3::new(-grad.x * scalar, -grad.y * scalar, scalar), scalar)
}

/// True when the required normal acceleration is inward: the boundary cannot
/// push, so the geodesic departs on its tangent line.
pub fn liftoff_event(surface: &Surface, state: &GeodesicState) -> bool {
    let (_, scalar) = surface_accel(
        surface,
        state.position.x,
        state.position.y,
        state.velocity.x,
        state.velocity.y,
    );
    scalar < -LIFTOFF_TOL
}

/// One RK4 step of the boundary ODE followed by projection of the position
/// onto the surface and re-orthogonalization of the velocity to the tangent
/// plane. The arc length advances by `ds`.
pub fn step_boundary(surface: &Surface, state: &GeodesicState, ds: f64) -> GeodesicState {
    let f = |p: &Vector3<f64>, v: &Vector3<f64>| -> (Vector3<f64>, Vector3<f64>) {
        let (a, _) = surface_accel(surface, p.x, p.y, v.x, v.y);
        (*v, a)
    };
    let (p0, v0) = (state.position, state.velocity);
    let (k1p, k1v) = f(&p0, &v0);
    let (k2p, k2v) = f(&(p0 + k1p * (ds / 2.0)), &(v0 + k1v * (ds / 2.0)));
    let (k3p, k3v) = f(&(p0 + k2p * (ds / 2.0)), &(v0 + k2v * (ds / 2.0)));
    let (k4p, k4v) = f(&(p0 + k3p * ds), &(v0 + k3v * ds));
    let mut p = p0 + (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (ds / 6.0);
    let mut v = v0 + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (ds / 6.0);

    p.z = surface.height(p.x, p.y);
    let n = surface.normal_at(p.x, p.y).normalize();
    v -= n * v.dot(&n);
    v.normalize_mut();

    GeodesicState { position: p, velocity: v, mode: state.mode, s: state.s + ds }
}

/// Clearance `g(x(sigma), y(sigma)) - z(sigma)` along the straight line
/// through `p` with direction `v`, as an exact polynomial in `sigma`.
fn line_clearance(surface: &Surface, p: &Vector3<f64>, v: &Vector3<f64>) -> UnivariateSeries {
    let order = surface.g().order();
    let lx = UnivariateSeries::from_coeffs(order, &[p.x, v.x]);
    let ly = UnivariateSeries::from_coeffs(order, &[p.y, v.y]);
    let mut x_pows = vec![UnivariateSeries::constant(1.0, order)];
    let mut y_pows = vec![UnivariateSeries::constant(1.0, order)];
    for k in 1..=order {
        x_pows.push(x_pows[k - 1].mul(&lx));
        y_pows.push(y_pows[k - 1].mul(&ly));
    }
    let mut f = UnivariateSeries::zero(order.max(1));
    for (i, j, c) in surface.g().iter() {
        let term = x_pows[i].mul(&y_pows[j]);
        for k in 0..=order {
            let t = term.coeff(k);
            if t != 0.0 {
                f.add_to_coeff(k, c * t);
            }
        }
    }
    f.add_to_coeff(0, -p.z);
    f.add_to_coeff(1, -v.z);
    f
}

#[derive(Debug, Clone, Copy)]
pub struct ContactEvent {
    pub surface: usize,
    /// Distance along the line from the query state.
    pub s_hit: f64,
    pub tangential: bool,
}

/// First surface contact of the straight extension of `state`, searched on a
/// uniform grid of spacing `scan_step` over `(DEADBAND, sigma_end]` and then
/// localized by bisection. Both genuine crossings and grazing minima of the
/// clearance (within [`GRAZE_TOL`] of zero) are reported; `None` means the
/// line stays clear until `sigma_end`.
pub fn line_contact(
    state: &GeodesicState,
    surfaces: &[Surface],
    sigma_end: f64,
    scan_step: f64,
) -> Option<ContactEvent> {
    let mut best: Option<ContactEvent> = None;
    for (index, surface) in surfaces.iter().enumerate() {
        let f = line_clearance(surface, &state.position, &state.velocity);
        let fp = f.derivative();
        if let Some(event) = scan_profile(&f, &fp, index, sigma_end, scan_step) {
            if best.map_or(true, |b| event.s_hit < b.s_hit) {
                best = Some(event);
            }
        }
    }
    best
}

fn scan_profile(
    f: &UnivariateSeries,
    fp: &UnivariateSeries,
    surface: usize,
    sigma_end: f64,
    scan_step: f64,
) -> Option<ContactEvent> {
    if sigma_end <= DEADBAND {
        return None;
    }
    let event = |s_hit: f64| ContactEvent {
        surface,
        s_hit,
        tangential: fp.eval(s_hit).abs() < TANGENCY_TOL,
    };
    let mut prev_sigma = DEADBAND;
    let mut prev_f = f.eval(prev_sigma);
    let mut prev_fp = fp.eval(prev_sigma);
    let steps = ((sigma_end - DEADBAND) / scan_step).ceil() as usize;
    for k in 1..=steps.max(1) {
        let sigma = (DEADBAND + k as f64 * scan_step).min(sigma_end);
        let value = f.eval(sigma);
        let slope = fp.eval(sigma);
        // Clearance drops below the penetration threshold: a contact. When
        // the previous value was safely positive the zero crossing itself is
        // sharp; a slow dive (tangent departure into the obstacle) localizes
        // the threshold crossing instead.
        if prev_f >= -PENETRATION_TOL && value < -PENETRATION_TOL {
            let s_hit = if prev_f > PENETRATION_TOL {
                bisect(prev_sigma, sigma, |s| f.eval(s) < 0.0)
            } else {
                bisect(prev_sigma, sigma, |s| f.eval(s) < -PENETRATION_TOL)
            };
            return Some(event(s_hit));
        }
        // Crossing back out of the infeasible side also touches the surface.
        if prev_f < -PENETRATION_TOL && value > PENETRATION_TOL {
            return Some(event(bisect(prev_sigma, sigma, |s| f.eval(s) > 0.0)));
        }
        // Local clearance minimum dipping to zero from the feasible side:
        // a grazing touch.
        if prev_f > -PENETRATION_TOL && prev_fp < 0.0 && slope >= 0.0 {
            let s_min = bisect(prev_sigma, sigma, |s| fp.eval(s) >= 0.0);
            let touch = f.eval(s_min);
            if touch.abs() <= GRAZE_TOL {
                return Some(ContactEvent { surface, s_hit: s_min, tangential: true });
            }
            if touch < -GRAZE_TOL {
                // The minimum dived below zero between grid points.
                return Some(event(bisect(prev_sigma, s_min, |s| f.eval(s) < 0.0)));
            }
        }
        prev_sigma = sigma;
        prev_f = value;
        prev_fp = slope;
        if sigma >= sigma_end {
            break;
        }
    }
    None
}

/// Bisection for the boundary of `pred` on `[lo, hi]` with `pred(lo) = false`
/// and `pred(hi) = true`; returns a point within [`EVENT_TOL_S`] of the
/// crossing (biased to the `true` side).
fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..64 {
        if hi - lo <= EVENT_TOL_S {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactDecision {
    Attach,
    ContinueStraight,
    TerminateTransversal,
}

/// Decides the continuation at a contact of the straight line `(position,
/// velocity)` with `surface`. Transversal contact terminates (a shortest
/// path cannot turn a corner). Tangential contact attaches when the straight
/// continuation would penetrate the obstacle `{z > g}`; a feasible graze
/// continues straight unless `attach_on_graze` selects the wrapping branch.
/// Returns an optional flag naming a degenerate (ambiguous) tangency.
pub fn contact_decision(
    surface: &Surface,
    position: &Vector3<f64>,
    velocity: &Vector3<f64>,
    attach_on_graze: bool,
) -> (ContactDecision, Option<&'static str>) {
    let f = line_clearance(surface, position, velocity);
    let slope = f.derivative().eval(0.0);
    if slope.abs() >= TANGENCY_TOL {
        return (ContactDecision::TerminateTransversal, None);
    }
    // Second derivative of the clearance along the line is the Hessian form.
    let q = surface.hessian_form(position.x, position.y, velocity.x, velocity.y);
    if q < -LIFTOFF_TOL {
        return (ContactDecision::Attach, None);
    }
    if q > LIFTOFF_TOL {
        if attach_on_graze {
            return (ContactDecision::Attach, None);
        }
        return (ContactDecision::ContinueStraight, None);
    }
    // Zero normal curvature along the direction: probe the clearance beyond.
    let probe = f.eval(100.0 * DEADBAND);
    if probe < -PENETRATION_TOL {
        (ContactDecision::Attach, Some("ambiguous_grazing_attach"))
    } else if attach_on_graze && probe.abs() <= GRAZE_TOL {
        (ContactDecision::Attach, Some("ambiguous_grazing_attach"))
    } else {
        (ContactDecision::ContinueStraight, Some("ambiguous_grazing_continue"))
    }
}

enum RideOutcome {
    Liftoff(GeodesicState),
    Finished(GeodesicState, Termination, Option<String>),
    StepLimit(GeodesicState),
}

struct Tracer<'a> {
    surfaces: &'a [Surface],
    eps: f64,
    limits: TraceLimits,
    center: Vector3<f64>,
    segments: Vec<Segment>,
    switches: Vec<SwitchPoint>,
    samples: Vec<Sample>,
    flags: Vec<String>,
    steps_used: usize,
}

impl<'a> Tracer<'a> {
    fn chart_radius(&self) -> f64 {
        self.surfaces.iter().map(|s| s.chart_radius()).fold(f64::INFINITY, f64::min)
    }

    fn push_sample(&mut self, state: &GeodesicState, kind: SegmentKind) {
        self.samples.push(Sample { s: state.s, position: state.position, kind });
    }

    fn record_switch(&mut self, state: &GeodesicState, from: SegmentKind, to: SegmentKind) {
        self.switches.push(SwitchPoint {
            s: state.s,
            point: state.position,
            from_kind: from,
            to_kind: to,
            velocity: state.velocity,
        });
    }

    /// Integrates one boundary segment starting at `state` on `surface_index`.
    fn ride(&mut self, mut state: GeodesicState, surface_index: usize) -> RideOutcome {
        let surface = &self.surfaces[surface_index];
        let kind = SegmentKind::Boundary(surface_index);
        let ds = self.limits.ds;
        let radius = self.chart_radius();
        let others: Vec<usize> =
            (0..self.surfaces.len()).filter(|&j| j != surface_index).collect();
        self.push_sample(&state, kind);
        let mut since_sample = 0usize;
        loop {
            if self.steps_used >= self.limits.max_steps {
                return RideOutcome::StepLimit(state);
            }
            self.steps_used += 1;
            let candidate = step_boundary(surface, &state, ds);

            let out_ball = (candidate.position - self.center).norm() > self.eps;
            let out_chart = !(candidate.position.x.abs() <= radius
                && candidate.position.y.abs() <= radius);
            let lifted = {
                let (_, q) = surface_accel(
                    surface,
                    candidate.position.x,
                    candidate.position.y,
                    candidate.velocity.x,
                    candidate.velocity.y,
                );
                q < -LIFTOFF_TOL
            };
            let blocked = others.iter().copied().find(|&j| {
                self.surfaces[j].clearance(&candidate.position) < -PENETRATION_TOL
            });

            if !out_ball && !out_chart && !lifted && blocked.is_none() {
                state = candidate;
                since_sample += 1;
                if since_sample >= self.limits.sample_stride {
                    self.push_sample(&state, kind);
                    since_sample = 0;
                }
                continue;
            }

            // Localize the earliest event within (0, ds].
            let mut best_h = ds;
            let mut event = 0u8; // 1 liftoff, 2 ball, 3 chart, 4 blocked
            let mut blocked_j = 0usize;
            if lifted {
                let h = bisect(0.0, ds, |h| {
                    let c = step_boundary(surface, &state, h);
                    let (_, q) = surface_accel(
                        surface,
                        c.position.x,
                        c.position.y,
                        c.velocity.x,
                        c.velocity.y,
                    );
                    q < -LIFTOFF_TOL
                });
                if h <= best_h {
                    best_h = h;
                    event = 1;
                }
            }
            if out_ball {
                let h = bisect(0.0, ds, |h| {
                    let c = step_boundary(surface, &state, h);
                    (c.position - self.center).norm() > self.eps
                });
                if h <= best_h {
                    best_h = h;
                    event = 2;
                }
            }
            if out_chart {
                let h = bisect(0.0, ds, |h| {
                    let c = step_boundary(surface, &state, h);
                    !(c.position.x.abs() <= radius && c.position.y.abs() <= radius)
                });
                if h <= best_h {
                    best_h = h;
                    event = 3;
                }
            }
            if let Some(j) = blocked {
                let h = bisect(0.0, ds, |h| {
                    let c = step_boundary(surface, &state, h);
                    self.surfaces[j].clearance(&c.position) < -PENETRATION_TOL
                });
                if h <= best_h {
                    best_h = h;
                    event = 4;
                    blocked_j = j;
                }
            }

            let at_event = step_boundary(surface, &state, best_h);
            self.push_sample(&at_event, kind);
            return match event {
                1 => RideOutcome::Liftoff(at_event),
                2 => RideOutcome::Finished(at_event, Termination::ExitedBall, None),
                3 => RideOutcome::Finished(at_event, Termination::LeftChart, None),
                _ => RideOutcome::Finished(
                    at_event,
                    Termination::TransversalImpact,
                    Some(format!("ride_blocked_by_surface_{}", blocked_j + 1)),
                ),
            };
        }
    }
}

/// Traces a geodesic from `initial` until it exits the `eps`-ball around its
/// start point, leaves the chart, impacts a surface transversally, or hits a
/// segment/step limit. Velocity is continuous across every switch point.
pub fn trace(
    initial: GeodesicState,
    surfaces: &[Surface],
    eps: f64,
    limits: &TraceLimits,
) -> Result<TraceResult, TracerError> {
    if surfaces.is_empty() {
        return Err(TracerError::InconsistentInitialState("no surfaces supplied".into()));
    }
    if !(eps > 0.0) {
        return Err(TracerError::InconsistentInitialState(format!(
            "eps = {eps} must be positive"
        )));
    }
    let speed = initial.velocity.norm();
    if (speed - 1.0).abs() > 1e-9 {
        return Err(TracerError::InconsistentInitialState(format!(
            "speed {speed} is not unit"
        )));
    }
    let mut state = initial;
    state.velocity /= speed;
    if let Mode::OnSurface(i) = state.mode {
        if i >= surfaces.len() {
            return Err(TracerError::InconsistentInitialState(format!(
                "surface index {i} out of range"
            )));
        }
        let clearance = surfaces[i].clearance(&state.position);
        if clearance.abs() > 10.0 * crate::geometry::ON_SURFACE_TOL {
            return Err(TracerError::InconsistentInitialState(format!(
                "on-surface state is off the surface by {clearance:e}"
            )));
        }
        let n = surfaces[i]
            .normal_at(state.position.x, state.position.y)
            .normalize();
        let normal_speed = state.velocity.dot(&n);
        if normal_speed.abs() > 1e-8 {
            return Err(TracerError::InconsistentInitialState(format!(
                "on-surface velocity has normal component {normal_speed:e}"
            )));
        }
    }

    let mut tracer = Tracer {
        surfaces,
        eps,
        limits: limits.clone(),
        center: state.position,
        segments: Vec::new(),
        switches: Vec::new(),
        samples: Vec::new(),
        flags: Vec::new(),
        steps_used: 0,
    };

    // Demote a start that cannot ride (inward required acceleration) to a
    // line; this is an initial condition, not a switch point.
    if let Mode::OnSurface(i) = state.mode {
        if liftoff_event(&surfaces[i], &state) {
            state.mode = Mode::Interior;
        }
    }

    let mut came_from_attach = false;
    let termination;
    let mut final_state = state;
    'outer: loop {
        if tracer.segments.len() >= limits.max_segments {
            termination = Termination::MaxSegments;
            break;
        }
        match state.mode {
            Mode::OnSurface(i) => {
                let seg_start = state;
                // A stalled attach (immediate liftoff with no progress) has
                // no C^1 continuation; report and stop.
                if liftoff_event(&surfaces[i], &state) {
                    if came_from_attach {
                        tracer.flags.push("stalled_at_tangency".into());
                        tracer.segments.push(Segment {
                            kind: SegmentKind::Boundary(i),
                            s_start: seg_start.s,
                            s_end: state.s,
                            start: seg_start.position,
                            end: state.position,
                            line_slope_t: None,
                        });
                        termination = Termination::TransversalImpact;
                        final_state = state;
                        break 'outer;
                    }
                    state.mode = Mode::Interior;
                    continue;
                }
                came_from_attach = false;
                let outcome = tracer.ride(state, i);
                let (end_state, done): (GeodesicState, Option<(Termination, Option<String>)>) =
                    match outcome {
                        RideOutcome::Liftoff(st) => (st, None),
                        RideOutcome::Finished(st, t, flag) => (st, Some((t, flag))),
                        RideOutcome::StepLimit(st) => (st, Some((Termination::StepLimit, None))),
                    };
                tracer.segments.push(Segment {
                    kind: SegmentKind::Boundary(i),
                    s_start: seg_start.s,
                    s_end: end_state.s,
                    start: seg_start.position,
                    end: end_state.position,
                    line_slope_t: None,
                });
                if let Some((t, flag)) = done {
                    if let Some(flag) = flag {
                        tracer.flags.push(flag);
                    }
                    termination = t;
                    final_state = end_state;
                    break 'outer;
                }
                // Liftoff switch: depart on the tangent line.
                let mut next = end_state;
                next.mode = Mode::Interior;
                tracer.record_switch(&next, SegmentKind::Boundary(i), SegmentKind::Line);
                state = next;
            }
            Mode::Interior => {
                let seg_start = state;
                let radius = tracer.chart_radius();
                let (sigma_end, exit_term) = line_exit(&state, &tracer.center, eps, radius);
                let slope_t = if state.velocity.x.abs() > 1e-12 {
                    Some(state.velocity.y / state.velocity.x)
                } else {
                    None
                };
                tracer.push_sample(&state, SegmentKind::Line);

                let mut sigma_from = 0.0;
                let (end_sigma, after): (f64, Option<(usize, bool)>) = loop {
                    let probe_state = GeodesicState {
                        position: state.position + state.velocity * sigma_from,
                        velocity: state.velocity,
                        mode: Mode::Interior,
                        s: state.s + sigma_from,
                    };
                    match line_contact(&probe_state, surfaces, sigma_end - sigma_from, limits.ds)
                    {
                        None => break (sigma_end, None),
                        Some(contact) => {
                            let sigma_hit = sigma_from + contact.s_hit;
                            let hit_pos = state.position + state.velocity * sigma_hit;
                            if contact.tangential {
                                let (decision, flag) = contact_decision(
                                    &surfaces[contact.surface],
                                    &hit_pos,
                                    &state.velocity,
                                    limits.attach_on_graze,
                                );
                                if let Some(flag) = flag {
                                    tracer.flags.push(flag.into());
                                }
                                match decision {
                                    ContactDecision::ContinueStraight => {
                                        sigma_from = sigma_hit + DEADBAND;
                                        if sigma_from >= sigma_end {
                                            break (sigma_end, None);
                                        }
                                        continue;
                                    }
                                    ContactDecision::Attach => {
                                        // Attaching needs a pushable surface.
                                        let q = surfaces[contact.surface].hessian_form(
                                            hit_pos.x,
                                            hit_pos.y,
                                            state.velocity.x,
                                            state.velocity.y,
                                        );
                                        if q < -LIFTOFF_TOL {
                                            tracer.flags.push("blocked_tangent_reentry".into());
                                            break (sigma_hit, Some((contact.surface, false)));
                                        }
                                        break (sigma_hit, Some((contact.surface, true)));
                                    }
                                    ContactDecision::TerminateTransversal => {
                                        break (sigma_hit, Some((contact.surface, false)));
                                    }
                                }
                            } else {
                                break (sigma_hit, Some((contact.surface, false)));
                            }
                        }
                    }
                };

                // Interior samples along the line.
                let stride_len = limits.ds * limits.sample_stride as f64;
                let mut sigma = stride_len;
                while sigma < end_sigma {
                    tracer.samples.push(Sample {
                        s: state.s + sigma,
                        position: state.position + state.velocity * sigma,
                        kind: SegmentKind::Line,
                    });
                    sigma += stride_len;
                }

                let end_pos = state.position + state.velocity * end_sigma;
                let end_s = state.s + end_sigma;
                tracer.segments.push(Segment {
                    kind: SegmentKind::Line,
                    s_start: seg_start.s,
                    s_end: end_s,
                    start: seg_start.position,
                    end: end_pos,
                    line_slope_t: slope_t,
                });
                let end_state = GeodesicState {
                    position: end_pos,
                    velocity: state.velocity,
                    mode: Mode::Interior,
                    s: end_s,
                };
                tracer.push_sample(&end_state, SegmentKind::Line);

                match after {
                    None => {
                        termination = exit_term;
                        final_state = end_state;
                        break 'outer;
                    }
                    Some((surface_index, attach)) => {
                        if !attach {
                            termination = Termination::TransversalImpact;
                            final_state = end_state;
                            break 'outer;
                        }
                        // Attach: snap the position onto the surface and
                        // clean the velocity into the tangent plane (the
                        // tangency tolerance bounds the adjustment).
                        let surface = &surfaces[surface_index];
                        let mut p = end_state.position;
                        p.z = surface.height(p.x, p.y);
                        let n = surface.normal_at(p.x, p.y).normalize();
                        let mut v = end_state.velocity;
                        v -= n * v.dot(&n);
                        v.normalize_mut();
                        let next = GeodesicState {
                            position: p,
                            velocity: v,
                            mode: Mode::OnSurface(surface_index),
                            s: end_state.s,
                        };
                        tracer.record_switch(
                            &next,
                            SegmentKind::Line,
                            SegmentKind::Boundary(surface_index),
                        );
                        came_from_attach = true;
                        state = next;
                    }
                }
            }
        }
    }

    Ok(TraceResult {
        segments: tracer.segments,
        switch_points: tracer.switches,
        termination,
        eps,
        limits: limits.clone(),
        origin: tracer.center,
        final_state,
        samples: tracer.samples,
        flags: tracer.flags,
    })
}

/// Distance along the line at which it exits the eps-ball or the chart box,
/// with the corresponding termination (ball exit wins ties).
fn line_exit(
    state: &GeodesicState,
    center: &Vector3<f64>,
    eps: f64,
    radius: f64,
) -> (f64, Termination) {
    let d = state.position - center;
    let b = state.velocity.dot(&d);
    let c = d.norm_squared() - eps * eps;
    // sigma^2 + 2 b sigma + c = 0 with c <= 0 inside the ball.
    let disc = (b * b - c).max(0.0).sqrt();
    let sigma_ball = (-b + disc).max(0.0);

    let mut sigma_chart = f64::INFINITY;
    for (p, v) in [
        (state.position.x, state.velocity.x),
        (state.position.y, state.velocity.y),
    ] {
        if v.abs() > 1e-15 {
            for target in [radius, -radius] {
                let sigma = (target - p) / v;
                if sigma > 0.0 {
                    sigma_chart = sigma_chart.min(sigma);
                }
            }
        }
    }
    if sigma_ball <= sigma_chart {
        (sigma_ball, Termination::ExitedBall)
    } else {
        (sigma_chart, Termination::LeftChart)
    }
}

#[derive(Debug, Clone)]
pub struct ShootResult {
    pub trace: TraceResult,
    /// Arc length along the trace at the closest approach to the target.
    pub length: f64,
    pub miss: f64,
    /// Initial tangent angle in the chart plane.
    pub theta: f64,
}

/// Two-point query: golden-section search over the initial tangent angle at
/// `a` (a point on `surfaces[0]`) minimizing the closest-approach distance to
/// `b`. Both points are chart coordinates with heights on the surface.
pub fn shoot_between(
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    surfaces: &[Surface],
    tol: f64,
    limits: &TraceLimits,
) -> Result<ShootResult, TracerError> {
    let mut limits = limits.clone();
    limits.sample_stride = 1;
    let span = (b - a).norm();
    let eps = 2.0 * span + 0.1;

    let run = |theta: f64| -> Result<(f64, f64, TraceResult), TracerError> {
        let state = GeodesicState::on_surface(surfaces, 0, a.x, a.y, theta);
        let result = trace(state, surfaces, eps, &limits)?;
        let (miss, length) = closest_approach(&result, b);
        Ok((miss, length, result))
    };

    let base = (b.y - a.y).atan2(b.x - a.x);
    let mut best: Option<(f64, f64, f64)> = None; // (miss, length, theta)
    let coarse = 81usize;
    for k in 0..coarse {
        let theta = base - 0.9 + 1.8 * (k as f64) / (coarse - 1) as f64;
        let (miss, length, _) = run(theta)?;
        if best.map_or(true, |(m, _, _)| miss < m) {
            best = Some((miss, length, theta));
        }
    }
    let (mut best_miss, mut best_len, mut best_theta) = best.unwrap();
    let step = 1.8 / (coarse - 1) as f64;

    // Golden-section refinement on the bracketing interval.
    let inv_phi = 0.618_033_988_749_894_8;
    let mut lo = best_theta - step;
    let mut hi = best_theta + step;
    let mut t1 = hi - inv_phi * (hi - lo);
    let mut t2 = lo + inv_phi * (hi - lo);
    let mut m1 = run(t1)?.0;
    let mut m2 = run(t2)?.0;
    for _ in 0..80 {
        if hi - lo < 1e-12 {
            break;
        }
        if m1 <= m2 {
            hi = t2;
            t2 = t1;
            m2 = m1;
            t1 = hi - inv_phi * (hi - lo);
            m1 = run(t1)?.0;
        } else {
            lo = t1;
            t1 = t2;
            m1 = m2;
            t2 = lo + inv_phi * (hi - lo);
            m2 = run(t2)?.0;
        }
    }
    let theta = 0.5 * (lo + hi);
    let (miss, length, result) = run(theta)?;
    if miss <= best_miss {
        best_miss = miss;
        best_len = length;
        best_theta = theta;
    }
    let (_, _, final_result) = run(best_theta)?;
    let _ = result;
    if best_miss > tol {
        return Err(TracerError::NonConverged { miss: best_miss, tol });
    }
    Ok(ShootResult { trace: final_result, length: best_len, miss: best_miss, theta: best_theta })
}

/// Closest approach of a trace to `target`: exact on line segments, chord
/// interpolation between consecutive samples on boundary segments (shooting
/// traces record every step, so the chord error is O(ds^2)).
fn closest_approach(result: &TraceResult, target: &Vector3<f64>) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    let mut consider = |a: &Vector3<f64>, b: &Vector3<f64>, s_a: f64, s_b: f64| {
        let dir = b - a;
        let len = dir.norm();
        if len > 0.0 {
            let u = dir / len;
            let t = ((target - a).dot(&u)).clamp(0.0, len);
            let d = (a + u * t - target).norm();
            if d < best.0 {
                best = (d, s_a + (s_b - s_a) * (t / len));
            }
        } else {
            let d = (a - target).norm();
            if d < best.0 {
                best = (d, s_a);
            }
        }
    };
    for seg in &result.segments {
        if seg.kind == SegmentKind::Line {
            consider(&seg.start, &seg.end, seg.s_start, seg.s_end);
        }
    }
    for pair in result.samples.windows(2) {
        if pair[0].kind == pair[1].kind {
            consider(&pair[0].position, &pair[1].position, pair[0].s, pair[1].s);
        }
    }
    if let Some(last) = result.samples.last() {
        consider(&last.position, &last.position, last.s, last.s);
    }
    best
}
