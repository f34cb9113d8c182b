//! Smooth planar vector fields, Lie derivatives along a switching function,
//! and flows integrated up to a section.
//!
//! Flows use the Dormand–Prince 5(4) pair with its fourth-order continuous
//! extension. Section hits are bracketed on the dense output and then
//! polished by Newton iteration on `g(φ(t))`, where `φ(t)` is recomputed by
//! a single fresh step from the start of the bracketing step. This makes the
//! located point independent of the step history to round-off.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

/// Points and vectors share a representation.
pub type Point2 = Vec2;

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// `m[i][j] = ∂W_i/∂x_j`.
pub type Jacobian = [[f64; 2]; 2];
/// `h[i][j][k] = ∂²W_i/∂x_j∂x_k`.
pub type Hessian = [[[f64; 2]; 2]; 2];

/// A C² planar vector field with analytic first and second partials.
pub trait SmoothField: Send + Sync + std::fmt::Debug {
    fn eval(&self, p: Point2) -> Vec2;
    fn jacobian(&self, p: Point2) -> Jacobian;
    fn hessian(&self, p: Point2) -> Hessian;
}

/// Scalar profile of one variable with analytic derivatives up to order 2.
pub trait Profile: Send + Sync + std::fmt::Debug {
    fn value(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
}

impl Profile for Poly {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }
    fn d1(&self, x: f64) -> f64 {
        self.eval_deriv(x, 1)
    }
    fn d2(&self, x: f64) -> f64 {
        self.eval_deriv(x, 2)
    }
}

/// Field `(speed, g(x))`: constant horizontal speed and a vertical component
/// depending on `x` only. Every system in this crate has this shape.
#[derive(Debug, Clone)]
pub struct ShearField {
    pub speed: f64,
    pub vertical: Arc<dyn Profile>,
}

impl ShearField {
    pub fn new(speed: f64, vertical: Arc<dyn Profile>) -> Self {
        Self { speed, vertical }
    }

    pub fn polynomial(speed: f64, vertical: Poly) -> Self {
        Self::new(speed, Arc::new(vertical))
    }
}

impl SmoothField for ShearField {
    fn eval(&self, p: Point2) -> Vec2 {
        Vec2::new(self.speed, self.vertical.value(p.x))
    }

    fn jacobian(&self, p: Point2) -> Jacobian {
        [[0.0, 0.0], [self.vertical.d1(p.x), 0.0]]
    }

    fn hessian(&self, p: Point2) -> Hessian {
        let mut h = [[[0.0; 2]; 2]; 2];
        h[1][0][0] = self.vertical.d2(p.x);
        h
    }
}

/// `-W`, used to run flows backward in time.
#[derive(Debug, Clone, Copy)]
pub struct Reversed<'a>(pub &'a dyn SmoothField);

impl SmoothField for Reversed<'_> {
    fn eval(&self, p: Point2) -> Vec2 {
        -self.0.eval(p)
    }
    fn jacobian(&self, p: Point2) -> Jacobian {
        let j = self.0.jacobian(p);
        [[-j[0][0], -j[0][1]], [-j[1][0], -j[1][1]]]
    }
    fn hessian(&self, p: Point2) -> Hessian {
        let mut h = self.0.hessian(p);
        for a in h.iter_mut() {
            for b in a.iter_mut() {
                for c in b.iter_mut() {
                    *c = -*c;
                }
            }
        }
        h
    }
}

/// Scalar function on the plane whose zero set is tracked during integration.
pub trait EventFn: Send + Sync {
    fn value(&self, p: Point2) -> f64;
    fn grad(&self, p: Point2) -> Vec2;
}

/// Switching function with partials up to order 3; `Σ = f⁻¹(0)`.
pub trait SwitchingFunction: EventFn + std::fmt::Debug {
    /// `h[i][j] = ∂²f/∂x_i∂x_j`
    fn hessian(&self, _p: Point2) -> [[f64; 2]; 2] {
        [[0.0; 2]; 2]
    }
    /// `t[i][j][k] = ∂³f/∂x_i∂x_j∂x_k`
    fn third(&self, _p: Point2) -> [[[f64; 2]; 2]; 2] {
        [[[0.0; 2]; 2]; 2]
    }
}

/// `f(x, y) = y`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HorizontalLine;

impl EventFn for HorizontalLine {
    fn value(&self, p: Point2) -> f64 {
        p.y
    }
    fn grad(&self, _p: Point2) -> Vec2 {
        Vec2::new(0.0, 1.0)
    }
}

impl SwitchingFunction for HorizontalLine {}

/// Which smooth piece an arc follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldTag {
    X,
    Y,
    Sliding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TimeDirection {
    Forward,
    Backward,
}

impl TimeDirection {
    pub fn sign(self) -> f64 {
        match self {
            TimeDirection::Forward => 1.0,
            TimeDirection::Backward => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            TimeDirection::Forward => TimeDirection::Backward,
            TimeDirection::Backward => TimeDirection::Forward,
        }
    }
}

/// Sampled piece of an orbit. Times are strictly increasing for forward
/// arcs and strictly decreasing for backward ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitArc {
    pub samples: Vec<(f64, Point2)>,
    pub field_tag: FieldTag,
}

impl OrbitArc {
    pub fn new(field_tag: FieldTag) -> Self {
        Self {
            samples: Vec::new(),
            field_tag,
        }
    }

    pub fn start(&self) -> Option<Point2> {
        self.samples.first().map(|s| s.1)
    }

    pub fn end(&self) -> Option<Point2> {
        self.samples.last().map(|s| s.1)
    }

    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => (b.0 - a.0).abs(),
            _ => 0.0,
        }
    }

    /// Same point set traversed in the opposite direction.
    pub fn reversed(&self) -> OrbitArc {
        let mut samples = self.samples.clone();
        samples.reverse();
        OrbitArc {
            samples,
            field_tag: self.field_tag,
        }
    }
}

/// Square analysis window `[-radius, radius]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub radius: f64,
}

impl Window {
    pub fn new(radius: f64) -> Self {
        Self { radius }
    }

    /// `r = max(1, 5·(√max(β,0) + |μ| + |λ|))`.
    pub fn for_params(lambda: f64, beta: f64, mu: f64) -> Self {
        Self::new((5.0 * (beta.max(0.0).sqrt() + mu.abs() + lambda.abs())).max(1.0))
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x.abs() <= self.radius && p.y.abs() <= self.radius
    }

    pub fn contains_x(&self, x: f64) -> bool {
        x.abs() <= self.radius
    }

    /// Tolerance for deciding that two abscissas coincide.
    pub fn coincidence_tol(&self) -> f64 {
        1e-7 * (1.0 + self.radius)
    }
}

/// `W.f`, `W².f` or `W³.f` at `p` from analytic partials.
pub fn lie_derivative(
    w: &dyn SmoothField,
    f: &dyn SwitchingFunction,
    p: Point2,
    k: usize,
) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return Err(Error::LieOrder(k));
    }
    Ok(lie_derivatives(w, f, p)[k - 1])
}

/// `[W.f, W².f, W³.f]` at `p`.
pub fn lie_derivatives(w: &dyn SmoothField, f: &dyn SwitchingFunction, p: Point2) -> [f64; 3] {
    let v = w.eval(p);
    let wv = [v.x, v.y];
    let j = w.jacobian(p);
    let hw = w.hessian(p);
    let g = f.grad(p);
    let gf = [g.x, g.y];
    let hf = f.hessian(p);
    let tf = f.third(p);

    let l1 = gf[0] * wv[0] + gf[1] * wv[1];

    // ∇(W.f)_a = Σ_i f_ia W_i + f_i J_ia
    let mut grad_l1 = [0.0; 2];
    for (a, ga) in grad_l1.iter_mut().enumerate() {
        for i in 0..2 {
            *ga += hf[i][a] * wv[i] + gf[i] * j[i][a];
        }
    }
    let l2 = grad_l1[0] * wv[0] + grad_l1[1] * wv[1];

    // ∂a∂b (W.f) = Σ_i f_iab W_i + f_ia J_ib + f_ib J_ia + f_i W_i,ab
    let mut hess_l1 = [[0.0; 2]; 2];
    for (a, row) in hess_l1.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate() {
            for i in 0..2 {
                *entry += tf[i][a][b] * wv[i]
                    + hf[i][a] * j[i][b]
                    + hf[i][b] * j[i][a]
                    + gf[i] * hw[i][a][b];
            }
        }
    }
    // ∇(W².f)_b = Σ_a ∂b∂a(W.f) W_a + ∂a(W.f) J_ab
    let mut grad_l2 = [0.0; 2];
    for (b, gb) in grad_l2.iter_mut().enumerate() {
        for a in 0..2 {
            *gb += hess_l1[b][a] * wv[a] + grad_l1[a] * j[a][b];
        }
    }
    let l3 = grad_l2[0] * wv[0] + grad_l2[1] * wv[1];
    [l1, l2, l3]
}

/// Integration controls. Defaults follow abs 1e-10 / rel 1e-9.
#[derive(Debug, Clone, Copy)]
pub struct FlowOptions {
    pub window: Window,
    pub t_max: f64,
    pub atol: f64,
    pub rtol: f64,
    pub h_init: f64,
    /// Caps the step so that a shallow excursion across `Σ` is not
    /// stepped over between two event scans.
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
    /// Interior dense-output samples stored per accepted step.
    pub dense_samples: usize,
}

impl FlowOptions {
    pub fn new(window: Window) -> Self {
        Self {
            window,
            t_max: 200.0 * window.radius.max(1.0),
            atol: 1e-10,
            rtol: 1e-9,
            h_init: 1e-4,
            h_max: 0.01 * window.radius.max(1e-3),
            h_min: 1e-14,
            max_steps: 200_000,
            dense_samples: 3,
        }
    }
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self::new(Window::new(10.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NoHitReason {
    WindowExit,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowOutcome {
    /// The event function changed sign at `point` after elapsed time `time`
    /// (signed: negative for backward flows).
    Hit {
        arc: OrbitArc,
        point: Point2,
        time: f64,
    },
    NoHit {
        arc: OrbitArc,
        reason: NoHitReason,
    },
}

impl FlowOutcome {
    pub fn hit_point(&self) -> Option<Point2> {
        match self {
            FlowOutcome::Hit { point, .. } => Some(*point),
            FlowOutcome::NoHit { .. } => None,
        }
    }

    pub fn arc(&self) -> &OrbitArc {
        match self {
            FlowOutcome::Hit { arc, .. } | FlowOutcome::NoHit { arc, .. } => arc,
        }
    }

    pub fn into_arc(self) -> OrbitArc {
        match self {
            FlowOutcome::Hit { arc, .. } | FlowOutcome::NoHit { arc, .. } => arc,
        }
    }
}

/// Dense-output points checked for a sign change inside each step.
const EVENT_SCAN: usize = 8;

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Step {
    y1: Vec2,
    err: f64,
    dense: [Vec2; 5],
}

fn dopri_step(field: &dyn SmoothField, y0: Vec2, k1: Vec2, h: f64, atol: f64, rtol: f64) -> Step {
    let k2 = field.eval(y0 + (h * A21) * k1);
    let k3 = field.eval(y0 + h * (A31 * k1 + A32 * k2));
    let k4 = field.eval(y0 + h * (A41 * k1 + A42 * k2 + A43 * k3));
    let k5 = field.eval(y0 + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
    let k6 = field.eval(y0 + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
    let y1 = y0 + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
    let k7 = field.eval(y1);
    let e = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    let sx = atol + rtol * y0.x.abs().max(y1.x.abs());
    let sy = atol + rtol * y0.y.abs().max(y1.y.abs());
    let err = (((e.x / sx).powi(2) + (e.y / sy).powi(2)) / 2.0).sqrt();
    let ydiff = y1 - y0;
    let bspl = h * k1 - ydiff;
    let dense = [
        y0,
        ydiff,
        bspl,
        ydiff - h * k7 - bspl,
        h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
    ];
    Step { y1, err, dense }
}

fn dense_eval(d: &[Vec2; 5], theta: f64) -> Vec2 {
    let t1 = 1.0 - theta;
    d[0] + theta * (d[1] + t1 * (d[2] + theta * (d[3] + t1 * d[4])))
}

/// Integrates `field` forward from `p0` until `event` changes sign away
/// from `side` (the sign `event` takes just after the start), the orbit
/// leaves the window, or the time limit is reached.
///
/// `time_sign` only affects the time stamps written into the arc; pass a
/// [`Reversed`] field together with `-1.0` for backward flows.
pub fn flow_until(
    field: &dyn SmoothField,
    p0: Point2,
    event: &dyn EventFn,
    side: f64,
    time_sign: f64,
    tag: FieldTag,
    opts: &FlowOptions,
) -> Result<FlowOutcome> {
    let mut arc = OrbitArc::new(tag);
    arc.samples.push((0.0, p0));
    let mut t = 0.0;
    let mut y = p0;
    let mut k1 = field.eval(y);
    let mut h = opts.h_init;
    let mut steps = 0usize;
    let mut first = true;
    let mut last_err: f64 = 1e-4;

    loop {
        if t >= opts.t_max {
            return Ok(FlowOutcome::NoHit {
                arc,
                reason: NoHitReason::TimeLimit,
            });
        }
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Integration {
                t: time_sign * t,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        h = h.min(opts.h_max).min(opts.t_max - t).max(0.0);
        if h < opts.h_min {
            if opts.t_max - t < opts.h_min {
                return Ok(FlowOutcome::NoHit {
                    arc,
                    reason: NoHitReason::TimeLimit,
                });
            }
            return Err(Error::Integration {
                t: time_sign * t,
                reason: "step size underflow".into(),
            });
        }
        let step = dopri_step(field, y, k1, h, opts.atol, opts.rtol);
        if !step.y1.is_finite() {
            h *= 0.25;
            continue;
        }
        if step.err > 1.0 {
            let fac = (0.9 * step.err.powf(-0.2)).clamp(0.1, 1.0);
            h *= fac;
            continue;
        }

        // Accepted step [t, t + h]. Near-polynomial orbits let the step
        // grow past two crossings, so the dense output is scanned too.
        let mut g1 = side * event.value(step.y1);
        let mut theta_end = 1.0;
        if g1 > 0.0 {
            for i in 1..EVENT_SCAN {
                let theta = i as f64 / EVENT_SCAN as f64;
                let g = side * event.value(dense_eval(&step.dense, theta));
                if g <= 0.0 && !(first && i == 1 && g == 0.0) {
                    g1 = g;
                    theta_end = theta;
                    break;
                }
            }
        }
        let mut bracket = None;
        if g1 <= 0.0 {
            if first {
                // Event function starts at zero on the section; find an
                // interior point that is strictly on `side`.
                let mut lo = None;
                for f in [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625] {
                    let theta = f * theta_end;
                    let q = dense_eval(&step.dense, theta);
                    if side * event.value(q) > 0.0 {
                        lo = Some(theta);
                        break;
                    }
                }
                match lo {
                    Some(th) => bracket = Some((th, theta_end)),
                    None => {
                        if side * event.value(p0) > 0.0 {
                            bracket = Some((0.0, theta_end));
                        } else {
                            return Err(Error::Integration {
                                t: 0.0,
                                reason: "orbit does not enter the launch side".into(),
                            });
                        }
                    }
                }
            } else {
                bracket = Some((0.0, theta_end));
            }
        }

        if let Some((mut lo, mut hi)) = bracket {
            // Bisection on the dense output.
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if side * event.value(dense_eval(&step.dense, mid)) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if (hi - lo) * h < 1e-15 {
                    break;
                }
            }
            let (tau, point) = polish_event(field, event, y, k1, h, lo, hi, opts);
            push_dense(&mut arc, &step.dense, t, h, tau, time_sign, opts.dense_samples);
            let t_hit = t + tau * h;
            push_sample(&mut arc, time_sign * t_hit, point);
            return Ok(FlowOutcome::Hit {
                arc,
                point,
                time: time_sign * t_hit,
            });
        }

        push_dense(&mut arc, &step.dense, t, h, 1.0, time_sign, opts.dense_samples);
        t += h;
        y = step.y1;
        k1 = field.eval(y);
        push_sample(&mut arc, time_sign * t, y);
        first = false;

        if !opts.window.contains(y) {
            return Ok(FlowOutcome::NoHit {
                arc,
                reason: NoHitReason::WindowExit,
            });
        }

        // PI-free step control with a mild memory of the previous error.
        let err = step.err.max(1e-10);
        let fac = 0.9 * err.powf(-0.17) * last_err.powf(0.04);
        last_err = err;
        h *= fac.clamp(0.2, 5.0);
    }
}

fn push_sample(arc: &mut OrbitArc, t: f64, p: Point2) {
    if let Some(&(tl, _)) = arc.samples.last() {
        if (t - tl).abs() <= 0.0 {
            return;
        }
    }
    arc.samples.push((t, p));
}

fn push_dense(
    arc: &mut OrbitArc,
    dense: &[Vec2; 5],
    t0: f64,
    h: f64,
    upto: f64,
    time_sign: f64,
    n: usize,
) {
    for i in 1..=n {
        let theta = i as f64 / (n + 1) as f64;
        if theta >= upto {
            break;
        }
        push_sample(arc, time_sign * (t0 + theta * h), dense_eval(dense, theta));
    }
}

/// Newton iteration on `g(φ(τ))` where `φ(τ)` is a single fresh step of
/// length `τ·h` from the start of the bracketing step.
#[allow(clippy::too_many_arguments)]
fn polish_event(
    field: &dyn SmoothField,
    event: &dyn EventFn,
    y0: Vec2,
    k1: Vec2,
    h: f64,
    lo: f64,
    hi: f64,
    opts: &FlowOptions,
) -> (f64, Point2) {
    let phi = |theta: f64| -> Vec2 {
        if theta <= 0.0 {
            y0
        } else {
            dopri_step(field, y0, k1, theta * h, opts.atol, opts.rtol).y1
        }
    };
    let mut theta = hi;
    let mut p = phi(theta);
    let mut best = (event.value(p).abs(), theta, p);
    for _ in 0..12 {
        let g = event.value(p);
        if g.abs() < 1e-14 {
            break;
        }
        let dg = event.grad(p).dot(field.eval(p)) * h;
        if dg == 0.0 || !dg.is_finite() {
            break;
        }
        let next = theta - g / dg;
        if !(next.is_finite()) || next < lo - 1e-3 || next > hi + 1e-3 {
            break;
        }
        theta = next;
        p = phi(theta);
        let gv = event.value(p).abs();
        if gv < best.0 {
            best = (gv, theta, p);
        }
    }
    (best.1, best.2)
}

/// Flows `w` from `p` in `direction` until the orbit reaches `Σ = f⁻¹(0)`
/// again. Launches from points on `Σ` pick the side from the first
/// non-vanishing Lie derivative (the second one for tangential starts).
pub fn flow_to_section(
    w: &dyn SmoothField,
    p: Point2,
    f: &dyn SwitchingFunction,
    direction: TimeDirection,
    tag: FieldTag,
    opts: &FlowOptions,
) -> Result<FlowOutcome> {
    let side = launch_side(w, f, p, direction)?;
    let s = direction.sign();
    match direction {
        TimeDirection::Forward => flow_until(w, p, f, side, s, tag, opts),
        TimeDirection::Backward => flow_until(&Reversed(w), p, f, side, s, tag, opts),
    }
}

/// Sign of `f` just after leaving `p` along `w` in the given direction.
pub fn launch_side(
    w: &dyn SmoothField,
    f: &dyn SwitchingFunction,
    p: Point2,
    direction: TimeDirection,
) -> Result<f64> {
    let fv = f.value(p);
    if fv.abs() > 1e-12 {
        return Ok(fv.signum());
    }
    let s = direction.sign();
    let [l1, l2, l3] = lie_derivatives(w, f, p);
    if l1.abs() > 1e-12 {
        Ok((s * l1).signum())
    } else if l2.abs() > 1e-12 {
        Ok(l2.signum())
    } else if l3.abs() > 1e-12 {
        Ok((s * l3).signum())
    } else {
        Err(Error::DegenerateLaunch { x: p.x, y: p.y })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(speed: f64, coeffs: &[f64]) -> ShearField {
        ShearField::polynomial(speed, Poly::new(coeffs.to_vec()))
    }

    #[test]
    fn lie_derivatives_of_standard_pieces() {
        let f = HorizontalLine;
        // (1, -x)
        let x_ivb = field(1.0, &[0.0, -1.0]);
        let o = Point2::ZERO;
        assert_eq!(lie_derivative(&x_ivb, &f, o, 1).unwrap(), 0.0);
        assert_eq!(lie_derivative(&x_ivb, &f, o, 2).unwrap(), -1.0);
        // (1, -x²)
        let y_k2 = field(1.0, &[0.0, 0.0, -1.0]);
        assert_eq!(lie_derivative(&y_k2, &f, o, 3).unwrap(), -2.0);
        assert!(matches!(
            lie_derivative(&y_k2, &f, o, 4),
            Err(Error::LieOrder(4))
        ));
        assert!(matches!(
            lie_derivative(&y_k2, &f, o, 0),
            Err(Error::LieOrder(0))
        ));
    }

    /// f(x, y) = y - x²/2, a curved switching line exercising the
    /// Hessian terms.
    #[derive(Debug)]
    struct Parabola;
    impl EventFn for Parabola {
        fn value(&self, p: Point2) -> f64 {
            p.y - 0.5 * p.x * p.x
        }
        fn grad(&self, p: Point2) -> Vec2 {
            Vec2::new(-p.x, 1.0)
        }
    }
    impl SwitchingFunction for Parabola {
        fn hessian(&self, _p: Point2) -> [[f64; 2]; 2] {
            [[-1.0, 0.0], [0.0, 0.0]]
        }
    }

    #[test]
    fn lie_derivatives_match_finite_differences_on_curved_switching() {
        let w = field(1.0, &[0.3, -1.0, 0.5]);
        let f = Parabola;
        let l1 = |p: Point2| lie_derivatives(&w, &f, p)[0];
        let l2 = |p: Point2| lie_derivatives(&w, &f, p)[1];
        let h = 1e-5;
        for p in [Point2::new(0.2, -0.1), Point2::new(-0.7, 0.4)] {
            let v = w.eval(p);
            let d = |g: &dyn Fn(Point2) -> f64| {
                let gx = (g(Point2::new(p.x + h, p.y)) - g(Point2::new(p.x - h, p.y))) / (2.0 * h);
                let gy = (g(Point2::new(p.x, p.y + h)) - g(Point2::new(p.x, p.y - h))) / (2.0 * h);
                gx * v.x + gy * v.y
            };
            let got = lie_derivatives(&w, &f, p);
            assert!((got[1] - d(&l1)).abs() < 1e-7);
            assert!((got[2] - d(&l2)).abs() < 1e-6);
        }
    }

    #[test]
    fn parabolic_orbit_returns_by_reflection() {
        // X_λ = (1, λ - x) with λ = 1 from (-1, 0) lands at 2λ - x = 3.
        let x = field(1.0, &[1.0, -1.0]);
        let opts = FlowOptions::new(Window::new(10.0));
        let out = flow_to_section(
            &x,
            Point2::new(-1.0, 0.0),
            &HorizontalLine,
            TimeDirection::Forward,
            FieldTag::X,
            &opts,
        )
        .unwrap();
        let hit = out.hit_point().expect("hit");
        assert!((hit.x - 3.0).abs() < 1e-8, "{hit:?}");
        assert!(hit.y.abs() < 1e-10);
        let arc = out.arc();
        assert!(arc.samples.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn visible_fold_orbit_never_returns() {
        let x_vis = field(1.0, &[0.0, 1.0]);
        let opts = FlowOptions::new(Window::new(5.0));
        let out = flow_to_section(
            &x_vis,
            Point2::ZERO,
            &HorizontalLine,
            TimeDirection::Forward,
            FieldTag::X,
            &opts,
        )
        .unwrap();
        assert!(matches!(
            out,
            FlowOutcome::NoHit {
                reason: NoHitReason::WindowExit,
                ..
            }
        ));
    }

    #[test]
    fn tangential_backward_launch_from_fold() {
        // Y = (1, -x² + 1): backward from (1, 0) hits (-2, 0).
        let y = field(1.0, &[1.0, 0.0, -1.0]);
        let opts = FlowOptions::new(Window::new(10.0));
        let out = flow_to_section(
            &y,
            Point2::new(1.0, 0.0),
            &HorizontalLine,
            TimeDirection::Backward,
            FieldTag::Y,
            &opts,
        )
        .unwrap();
        let hit = out.hit_point().unwrap();
        assert!((hit.x + 2.0).abs() < 1e-8, "{hit:?}");
        let arc = out.arc();
        assert!(arc.samples.windows(2).all(|w| w[1].0 < w[0].0));
        assert!(arc.samples[1..arc.samples.len() - 1].iter().all(|s| s.1.y < 0.0));
    }

    #[test]
    fn degenerate_launch_is_reported() {
        let zero = field(0.0, &[0.0]);
        assert!(matches!(
            launch_side(&zero, &HorizontalLine, Point2::ZERO, TimeDirection::Forward),
            Err(Error::DegenerateLaunch { .. })
        ));
    }

    #[test]
    fn window_tolerances() {
        let w = Window::for_params(0.0, 0.0, 0.0);
        assert_eq!(w.radius, 1.0);
        let w = Window::for_params(1.0, 1.0, 0.0);
        assert_eq!(w.radius, 10.0);
        assert!((w.coincidence_tol() - 1.1e-6).abs() < 1e-18);
    }
}
