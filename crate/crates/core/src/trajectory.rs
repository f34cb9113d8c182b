//! Hybrid integration of `Z = (X, Y)`: smooth arcs off `Σ`, crossings,
//! sliding/escaping motion along `Σ` under `Z^Σ`, exits at folds, and rest
//! points at non-regular singularities.
//!
//! Backward time runs the same rules on `-Z`; its sliding region is the
//! escaping region of `Z` and vice versa.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::planefield::{
    flow_to_section, flow_until, EventFn, FieldTag, FlowOptions, FlowOutcome, Hessian, Jacobian,
    NoHitReason, OrbitArc, Point2, SmoothField, TimeDirection, Vec2, Window,
};
use crate::switching::{direction_function, open_region, LIE_TOL, SCAN_CELLS};
use crate::system::FilippovSystem;

/// More events than this in one call aborts the run.
pub const MAX_EVENTS: usize = 10_000;
/// Sliding toward a pseudo-equilibrium stops this far short of it.
pub const CONVERGENCE_GAP: f64 = 1e-8;
const RESOLUTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    CrossUp,
    CrossDown,
    SlideEntry,
    SlideExit,
    TangencyHit,
    PseudoEquilibriumConvergence,
    WindowExit,
    RestPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryEvent {
    pub kind: EventKind,
    pub time: f64,
    pub point: Point2,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trajectory {
    pub arcs: Vec<OrbitArc>,
    pub events: Vec<TrajectoryEvent>,
}

impl Trajectory {
    pub fn end_point(&self) -> Option<Point2> {
        self.arcs.last().and_then(|a| a.end())
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn last_event(&self) -> Option<&TrajectoryEvent> {
        self.events.last()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub flow: FlowOptions,
    pub max_events: usize,
    /// Stop at the first event (after the start) within the given distance
    /// of the given point.
    pub stop_near: Option<(Point2, f64)>,
}

impl SimOptions {
    pub fn new(window: Window) -> Self {
        Self {
            flow: FlowOptions::new(window),
            max_events: MAX_EVENTS,
            stop_near: None,
        }
    }
}

/// Simulates with the system's default window.
pub fn simulate(
    z: &FilippovSystem,
    p0: Point2,
    t_max: f64,
    direction: TimeDirection,
) -> Result<Trajectory> {
    simulate_with(z, p0, t_max, direction, &SimOptions::new(z.default_window()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Arrival {
    Start,
    Arc,
    Sliding,
}

enum State {
    Smooth(FieldTag),
    OnSigma(Arrival),
    Sliding,
}

struct Run<'a> {
    z: &'a FilippovSystem,
    dir: TimeDirection,
    opts: &'a SimOptions,
    traj: Trajectory,
    /// Elapsed time, always non-negative.
    tau: f64,
    done: bool,
}

impl Run<'_> {
    fn sign(&self) -> f64 {
        self.dir.sign()
    }

    fn event(&mut self, kind: EventKind, point: Point2) -> Result<()> {
        let time = self.sign() * self.tau;
        if let Some(last) = self.traj.events.last() {
            if (time - last.time).abs() < RESOLUTION {
                return Err(Error::EventResolution {
                    time,
                    partial: Box::new(self.traj.clone()),
                });
            }
        }
        if self.traj.events.len() >= self.opts.max_events {
            return Err(Error::Chattering {
                limit: self.opts.max_events,
                partial: Box::new(self.traj.clone()),
            });
        }
        self.traj.events.push(TrajectoryEvent { kind, time, point });
        if let Some((target, tol)) = self.opts.stop_near {
            if self.tau > 0.0 && (point - target).norm() <= tol {
                self.done = true;
            }
        }
        Ok(())
    }

    fn push_arc(&mut self, mut arc: OrbitArc) {
        let offset = self.sign() * self.tau;
        for s in arc.samples.iter_mut() {
            s.0 += offset;
        }
        self.traj.arcs.push(arc);
    }

    /// `(X.f, Y.f)` in the direction of travel.
    fn lie(&self, x: f64) -> (f64, f64) {
        let (a, b) = self.z.lie_pair(x);
        (self.sign() * a, self.sign() * b)
    }

    /// `H` in the direction of travel, where defined.
    fn h(&self, x: f64) -> Option<f64> {
        direction_function(self.z, x).value.map(|h| self.sign() * h)
    }

    fn field(&self, tag: FieldTag) -> &dyn SmoothField {
        match tag {
            FieldTag::Y => self.z.y.as_ref(),
            _ => self.z.x.as_ref(),
        }
    }

    /// Whether the tangent orbit of `tag` at `(x, 0)` stays in its own
    /// half-plane (a visible fold).
    fn visible(&self, tag: FieldTag, x: f64) -> bool {
        let l2 = match tag {
            FieldTag::Y => self.z.lie_y(x)[1],
            _ => self.z.lie_x(x)[1],
        };
        match tag {
            FieldTag::Y => l2 < -LIE_TOL,
            _ => l2 > LIE_TOL,
        }
    }

    fn remaining(&self, t_max: f64) -> f64 {
        (t_max - self.tau).max(0.0)
    }
}

/// Hybrid trajectory from `p0` for at most `t_max` time units.
pub fn simulate_with(
    z: &FilippovSystem,
    p0: Point2,
    t_max: f64,
    direction: TimeDirection,
    opts: &SimOptions,
) -> Result<Trajectory> {
    let window = opts.flow.window;
    if !window.contains(p0) {
        return Err(Error::Domain {
            what: "initial point",
            value: p0.x.abs().max(p0.y.abs()),
            domain: format!("[-{r}, {r}]^2", r = window.radius),
        });
    }
    let mut run = Run {
        z,
        dir: direction,
        opts,
        traj: Trajectory::default(),
        tau: 0.0,
        done: false,
    };
    let fv = z.f.value(p0);
    let mut p = p0;
    let mut state = if fv.abs() <= RESOLUTION {
        p = Point2::new(p0.x, 0.0);
        State::OnSigma(Arrival::Start)
    } else if fv > 0.0 {
        State::Smooth(FieldTag::X)
    } else {
        State::Smooth(FieldTag::Y)
    };

    loop {
        if run.done || run.tau >= t_max {
            break;
        }
        state = match state {
            State::Smooth(tag) => {
                let mut fo = opts.flow;
                fo.t_max = run.remaining(t_max);
                let out = flow_to_section(run.field(tag), p, z.f.as_ref(), direction, tag, &fo)?;
                match out {
                    FlowOutcome::Hit { arc, point, time } => {
                        run.push_arc(arc);
                        run.tau += time.abs();
                        p = Point2::new(point.x, 0.0);
                        State::OnSigma(Arrival::Arc)
                    }
                    FlowOutcome::NoHit { arc, reason } => {
                        let end = arc.end().unwrap_or(p);
                        let dt = arc.duration();
                        run.push_arc(arc);
                        run.tau += dt;
                        if reason == NoHitReason::WindowExit {
                            run.event(EventKind::WindowExit, end)?;
                        }
                        break;
                    }
                }
            }
            State::OnSigma(arrival) => match resolve(&mut run, p.x, arrival)? {
                Some(next) => next,
                None => break,
            },
            State::Sliding => {
                let (next, q) = slide(&mut run, p.x, t_max)?;
                p = q;
                match next {
                    Some(s) => s,
                    None => break,
                }
            }
        };
    }
    Ok(run.traj)
}

/// Decides what happens at `(x, 0)`; `None` ends the trajectory.
fn resolve(run: &mut Run, x: f64, arrival: Arrival) -> Result<Option<State>> {
    let q = Point2::new(x, 0.0);
    let (a, b) = run.lie(x);
    let small_a = a.abs() <= LIE_TOL;
    let small_b = b.abs() <= LIE_TOL;
    if small_a && small_b {
        run.event(EventKind::RestPoint, q)?;
        return Ok(None);
    }
    if let Some(region) = open_region(a, b) {
        use crate::switching::SigmaPointClass::*;
        return match region {
            Crossing => {
                let up = a > 0.0;
                if arrival == Arrival::Arc {
                    run.event(if up { EventKind::CrossUp } else { EventKind::CrossDown }, q)?;
                }
                Ok(Some(State::Smooth(if up { FieldTag::X } else { FieldTag::Y })))
            }
            _ => {
                if run.h(x).is_none_or(|h| h.abs() <= LIE_TOL) {
                    run.event(EventKind::RestPoint, q)?;
                    return Ok(None);
                }
                if arrival == Arrival::Arc {
                    run.event(EventKind::SlideEntry, q)?;
                }
                Ok(Some(State::Sliding))
            }
        };
    }

    // Exactly one field is tangent at q.
    let (tangent, other, v) = if small_a {
        (FieldTag::X, FieldTag::Y, b)
    } else {
        (FieldTag::Y, FieldTag::X, a)
    };
    let other_leaves = match other {
        FieldTag::X => v > 0.0,
        _ => v < 0.0,
    };
    let tangent_visible = run.visible(tangent, x);
    let slide_on = sliding_continues(run, x);

    let next = match arrival {
        Arrival::Sliding => {
            if tangent_visible {
                run.event(EventKind::SlideExit, q)?;
                Some(State::Smooth(tangent))
            } else if slide_on {
                Some(State::Sliding)
            } else if other_leaves {
                run.event(EventKind::SlideExit, q)?;
                Some(State::Smooth(other))
            } else {
                None
            }
        }
        Arrival::Arc => {
            if tangent_visible {
                run.event(EventKind::TangencyHit, q)?;
                Some(State::Smooth(tangent))
            } else if slide_on {
                run.event(EventKind::SlideEntry, q)?;
                Some(State::Sliding)
            } else if other_leaves {
                run.event(EventKind::TangencyHit, q)?;
                Some(State::Smooth(other))
            } else {
                None
            }
        }
        Arrival::Start => {
            if other_leaves {
                Some(State::Smooth(other))
            } else if tangent_visible {
                Some(State::Smooth(tangent))
            } else if slide_on {
                Some(State::Sliding)
            } else {
                None
            }
        }
    };
    if next.is_none() {
        run.event(EventKind::RestPoint, q)?;
    }
    Ok(next)
}

/// Whether motion along `Σ` from `x` in the direction of `H` enters
/// `Σs ∪ Σe` immediately.
fn sliding_continues(run: &Run, x: f64) -> bool {
    let Some(h) = run.h(x) else {
        return false;
    };
    if h.abs() <= LIE_TOL {
        return false;
    }
    let step = 1e-7 * (1.0 + x.abs());
    let xn = x + h.signum() * step;
    let (a, b) = run.lie(xn);
    matches!(
        open_region(a, b),
        Some(crate::switching::SigmaPointClass::Sliding | crate::switching::SigmaPointClass::Escaping)
    )
}

/// `(±H(x), 0)` along `Σ`.
#[derive(Debug)]
struct SlidingFlow<'a> {
    z: &'a FilippovSystem,
    sign: f64,
}

impl SlidingFlow<'_> {
    fn h(&self, x: f64) -> f64 {
        self.sign * direction_function(self.z, x).value.unwrap_or(0.0)
    }
}

impl SmoothField for SlidingFlow<'_> {
    fn eval(&self, p: Point2) -> Vec2 {
        Vec2::new(self.h(p.x), 0.0)
    }
    fn jacobian(&self, p: Point2) -> Jacobian {
        let e = 1e-6 * (1.0 + p.x.abs());
        [[(self.h(p.x + e) - self.h(p.x - e)) / (2.0 * e), 0.0], [0.0, 0.0]]
    }
    fn hessian(&self, p: Point2) -> Hessian {
        let e = 1e-4 * (1.0 + p.x.abs());
        let mut h = [[[0.0; 2]; 2]; 2];
        h[0][0][0] = (self.h(p.x + e) - 2.0 * self.h(p.x) + self.h(p.x - e)) / (e * e);
        h
    }
}

/// `x_target - x`.
struct TargetAbscissa(f64);

impl EventFn for TargetAbscissa {
    fn value(&self, p: Point2) -> f64 {
        self.0 - p.x
    }
    fn grad(&self, _p: Point2) -> Vec2 {
        Vec2::new(-1.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Ahead {
    Boundary(f64),
    Pseudo(f64),
    Edge(f64),
}

/// First region boundary, zero of `H`, or window edge met when moving from
/// `x` in direction `sgn`.
fn look_ahead(run: &Run, x: f64, sgn: f64) -> Ahead {
    let r = run.opts.flow.window.radius;
    let edge = sgn * r;
    let step = 2.0 * r / SCAN_CELLS as f64;
    let probe = |x: f64| {
        let (a, b) = run.z.lie_pair(x);
        [a, b, direction_function(run.z, x).numerator]
    };
    let mut x0 = x + sgn * 1e-10 * (1.0 + x.abs());
    let mut g0 = probe(x0);
    loop {
        let x1 = if sgn > 0.0 {
            (x0 + step).min(edge)
        } else {
            (x0 - step).max(edge)
        };
        let g1 = probe(x1);
        let mut first: Option<(f64, usize)> = None;
        for k in 0..3 {
            if g0[k] * g1[k] <= 0.0 && g0[k] != 0.0 {
                let root = crate::roots::bisect(|t| probe(t)[k], x0.min(x1), x0.max(x1));
                let closer = first.is_none_or(|(f, _)| sgn * (root - f) < 0.0);
                if closer {
                    first = Some((root, k));
                }
            }
        }
        if let Some((root, k)) = first {
            return if k == 2 {
                Ahead::Pseudo(root)
            } else {
                Ahead::Boundary(root)
            };
        }
        if x1 == edge {
            return Ahead::Edge(edge);
        }
        x0 = x1;
        g0 = g1;
    }
}

/// Slides from `(x, 0)`; returns the next state and the current point.
fn slide(run: &mut Run, x: f64, t_max: f64) -> Result<(Option<State>, Point2)> {
    let q = Point2::new(x, 0.0);
    let Some(h) = run.h(x) else {
        run.event(EventKind::RestPoint, q)?;
        return Ok((None, q));
    };
    if h.abs() <= LIE_TOL {
        run.event(EventKind::RestPoint, q)?;
        return Ok((None, q));
    }
    let sgn = h.signum();
    let ahead = look_ahead(run, x, sgn);
    let target = match ahead {
        Ahead::Boundary(t) | Ahead::Edge(t) => t,
        Ahead::Pseudo(t) => t - sgn * CONVERGENCE_GAP,
    };
    let field = SlidingFlow {
        z: run.z,
        sign: run.sign(),
    };
    let mut fo = run.opts.flow;
    fo.t_max = run.remaining(t_max);
    // The window check must not fire before the edge event itself.
    fo.window = Window::new(fo.window.radius * (1.0 + 1e-9) + 1e-12);
    let out = flow_until(
        &field,
        q,
        &TargetAbscissa(target),
        sgn,
        run.sign(),
        FieldTag::Sliding,
        &fo,
    )?;
    match out {
        FlowOutcome::Hit { mut arc, point, time } => {
            let p = Point2::new(point.x, 0.0);
            if let Some(last) = arc.samples.last_mut() {
                last.1 = p;
            }
            run.push_arc(arc);
            run.tau += time.abs();
            let next = match ahead {
                Ahead::Boundary(_) => Some(State::OnSigma(Arrival::Sliding)),
                Ahead::Pseudo(_) => {
                    run.event(EventKind::PseudoEquilibriumConvergence, p)?;
                    None
                }
                Ahead::Edge(_) => {
                    run.event(EventKind::WindowExit, p)?;
                    None
                }
            };
            Ok((next, p))
        }
        FlowOutcome::NoHit { arc, .. } => {
            let end = arc.end().unwrap_or(q);
            run.tau += arc.duration();
            run.push_arc(arc);
            Ok((None, end))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{invisible_family, make_visible_family, FoldCuspParams};

    fn eq1(l: f64, b: f64, m: f64) -> FilippovSystem {
        invisible_family(FoldCuspParams::new(l, b, m)).unwrap()
    }

    fn wide(z: &FilippovSystem, p0: Point2, t: f64, dir: TimeDirection) -> Trajectory {
        simulate_with(z, p0, t, dir, &SimOptions::new(Window::new(4.0))).unwrap()
    }

    #[test]
    fn crossing_downward_into_y() {
        let z = eq1(0.0, -1.0, 0.0);
        let t = wide(&z, Point2::new(1.0, 0.5), 3.0, TimeDirection::Forward);
        assert_eq!(t.count(EventKind::CrossDown), 1);
        assert_eq!(t.events[0].kind, EventKind::CrossDown);
        assert!(t.events[0].point.x > 1.0);
        assert_eq!(t.arcs[1].field_tag, FieldTag::Y);
    }

    #[test]
    fn sliding_converges_to_pseudo_equilibrium() {
        let z = eq1(-0.5, 1.0, 0.0);
        let p1 = (-1.0 + 3f64.sqrt()) / 2.0;
        for x0 in [-0.3, 0.0, 0.9] {
            let t = simulate(&z, Point2::new(x0, 0.0), 200.0, TimeDirection::Forward).unwrap();
            let last = t.last_event().unwrap();
            assert_eq!(last.kind, EventKind::PseudoEquilibriumConvergence);
            assert!((last.point.x - p1).abs() < 1e-7);
            for arc in &t.arcs {
                assert_eq!(arc.field_tag, FieldTag::Sliding);
                assert!(arc.samples.iter().all(|(_, p)| p.y.abs() < 1e-9));
            }
        }
    }

    #[test]
    fn organizing_center_is_a_rest_point() {
        let z = eq1(0.0, 0.0, 0.0);
        let t = simulate(&z, Point2::ZERO, 1.0, TimeDirection::Forward).unwrap();
        assert_eq!(t.events.len(), 1);
        assert_eq!(t.events[0].kind, EventKind::RestPoint);
        assert_eq!(t.events[0].time, 0.0);
    }

    #[test]
    fn sliding_exits_tangentially_at_visible_fold() {
        // Σs = (a, d) with H ≡ 1: slide right to the visible X-fold at d.
        let v = make_visible_family(0.2, 1.0);
        let t = simulate(&v, Point2::new(-0.5, 0.0), 2.0, TimeDirection::Forward).unwrap();
        assert_eq!(t.events[0].kind, EventKind::SlideExit);
        assert!((t.events[0].point.x - 0.2).abs() < 1e-9);
        assert!((t.events[0].time - 0.7).abs() < 1e-8);
        assert_eq!(t.arcs[1].field_tag, FieldTag::X);
        let lie = v.lie_x(t.events[0].point.x);
        assert!(lie[0].abs() < 1e-8);
    }

    #[test]
    fn crossing_path_is_reversible() {
        let z = eq1(0.0, -1.0, 0.0);
        let p0 = Point2::new(0.5, 0.4);
        let fwd = wide(&z, p0, 2.0, TimeDirection::Forward);
        assert!(fwd.events.iter().all(|e| matches!(e.kind, EventKind::CrossDown | EventKind::CrossUp)));
        let end = fwd.end_point().unwrap();
        let back = wide(&z, end, 2.0, TimeDirection::Backward);
        let p = back.end_point().unwrap();
        assert!((p - p0).norm() < 1e-6, "{p:?}");
    }

    #[test]
    fn outside_window_is_rejected() {
        let z = eq1(0.0, -1.0, 0.0);
        let r = simulate(&z, Point2::new(1e3, 0.0), 1.0, TimeDirection::Forward);
        assert!(matches!(r, Err(Error::Domain { .. })));
    }
}
