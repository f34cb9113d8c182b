//! One-dimensional maps on `Σ`: the fold transition map `ξ`, the half
//! returns `ρ_X`, `ρ_Y`, the first return `ψ = ρ_X ∘ ρ_Y`, their fixed
//! points, and canard-cycle detection.
//!
//! For the invisible unfolding everything reduces to the potential
//! `F(x) = x³/3 − βx + B(x) + c0`: `Y`-orbits are the level curves
//! `y = F(x) − F(x1)`, so `ρ_Y(x)` is the other preimage of `F(x)`, and
//! `ψ(x) = 2λ − ρ_Y(x)`. Its fixed points are the solutions of
//! `σ(x) = (x + ρ_Y(x))/2 = λ`, and `σ` does not depend on `λ`.

use std::cell::Cell;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{bump_construct, potential_f, potential_f2, BumpFunction, FoldCuspParams};
use crate::planefield::{
    flow_to_section, FieldTag, FlowOptions, FlowOutcome, OrbitArc, Point2, TimeDirection, Window,
};
use crate::roots::{bisect, scan_roots};
use crate::switching::{
    direction_function, find_tangencies, open_region, SigmaPointClass, TangencyKind,
    TangencyOwner, LIE_TOL,
};
use crate::system::{Family, FilippovSystem};
use crate::trajectory::{simulate_with, SimOptions};

/// Samples of the fixed-point scan.
pub const FIXED_POINT_CELLS: usize = 4096;
/// `||m| − 1|` below this is non-hyperbolic.
pub const HYPERBOLICITY_BAND: f64 = 1e-4;
/// Central-difference step for multipliers.
pub const FD_STEP: f64 = 1e-6;
/// Residual below which a domain end counts as a fixed point.
pub const ENDPOINT_TOL: f64 = 1e-7;
/// A detected cycle must close within this distance.
pub const CLOSURE_TOL: f64 = 1e-7;

/// `ξ(x̄) = √(x̄² − 2δ)`: transition from the section through `(x̄, δ)` to
/// `Σ` along `X = (1, −x)` near an invisible fold.
pub fn fold_transition_xi(xbar: f64, delta: f64) -> Result<f64> {
    if delta <= 0.0 {
        return Err(Error::Domain {
            what: "delta",
            value: delta,
            domain: "(0, inf)".into(),
        });
    }
    let r = xbar * xbar - 2.0 * delta;
    if xbar < 0.0 || r < -1e-15 {
        return Err(Error::Domain {
            what: "xbar",
            value: xbar,
            domain: format!("[{}, inf)", (2.0 * delta).sqrt()),
        });
    }
    Ok(r.max(0.0).sqrt())
}

/// `ξ⁻¹(x) = √(x² + 2δ)`.
pub fn fold_transition_xi_inv(x: f64, delta: f64) -> Result<f64> {
    if delta <= 0.0 {
        return Err(Error::Domain {
            what: "delta",
            value: delta,
            domain: "(0, inf)".into(),
        });
    }
    Ok((x * x + 2.0 * delta).sqrt())
}

/// `(ξ⁻¹)'(x) = x / √(x² + 2δ)`; vanishes at the fold.
pub fn fold_transition_xi_inv_deriv(x: f64, delta: f64) -> Result<f64> {
    Ok(x / fold_transition_xi_inv(x, delta)?)
}

/// `ρ_X(x) = 2λ − x`: `X_λ`-orbits are parabolas symmetric about `x = λ`.
pub fn rho_x(lambda: f64, x: f64) -> f64 {
    2.0 * lambda - x
}

/// Half return of a field of `z` from `(x, 0)` back to `Σ`, by flowing.
/// `None` when the orbit leaves the window or times out.
pub fn half_return_flow(
    z: &FilippovSystem,
    tag: FieldTag,
    x: f64,
    opts: &FlowOptions,
) -> Result<Option<(f64, OrbitArc)>> {
    let w = match tag {
        FieldTag::Y => z.y.as_ref(),
        _ => z.x.as_ref(),
    };
    let out = flow_to_section(
        w,
        Point2::new(x, 0.0),
        z.f.as_ref(),
        TimeDirection::Forward,
        tag,
        opts,
    )?;
    Ok(match out {
        FlowOutcome::Hit { arc, point, .. } => Some((point.x, arc)),
        FlowOutcome::NoHit { .. } => None,
    })
}

/// Closed-form maps of the invisible unfolding for `β > 0`.
#[derive(Debug, Clone)]
pub struct InvisibleMaps {
    pub lambda: f64,
    pub beta: f64,
    pub mu: f64,
    /// `√β`.
    pub s: f64,
    /// `3√β + μ`, where the tangent orbit through `a = −√β` recollides.
    pub c: f64,
    pub bump: Arc<BumpFunction>,
}

impl InvisibleMaps {
    pub fn new(params: FoldCuspParams) -> Result<Self> {
        params.validate()?;
        let bump = Arc::new(bump_construct(params.beta, params.mu)?);
        Self::with_bump(params, bump)
    }

    pub fn with_bump(params: FoldCuspParams, bump: Arc<BumpFunction>) -> Result<Self> {
        if params.beta <= 0.0 {
            return Err(Error::Domain {
                what: "beta",
                value: params.beta,
                domain: "(0, inf)".into(),
            });
        }
        let s = params.beta.sqrt();
        Ok(Self {
            lambda: params.lambda,
            beta: params.beta,
            mu: params.mu,
            s,
            c: 3.0 * s + params.mu,
            bump,
        })
    }

    pub fn from_system(z: &FilippovSystem) -> Option<Self> {
        let (params, _) = z.invisible_params()?;
        let Family::Invisible { bump, .. } = &z.family else {
            return None;
        };
        Self::with_bump(params, bump.clone()).ok()
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    /// Domain `(√β, 3√β + μ)` of `ρ_Y` and `ψ`.
    pub fn domain(&self) -> (f64, f64) {
        (self.s, self.c)
    }

    /// `λ` at which `ρ_X(a) = c`.
    pub fn lambda_loop(&self) -> f64 {
        0.5 * (self.c - self.s)
    }

    /// `λ` at which `ρ_X(b) = c`.
    pub fn lambda_bc(&self) -> f64 {
        0.5 * (self.c + self.s)
    }

    pub fn potential(&self, x: f64) -> f64 {
        potential_f(&self.bump, x).0
    }

    fn check_domain(&self, x: f64) -> Result<f64> {
        let slack = 1e-12 * (1.0 + x.abs());
        if !(x >= self.s - slack && x <= self.c + slack) {
            return Err(Error::Domain {
                what: "x",
                value: x,
                domain: format!("[{}, {}]", self.s, self.c),
            });
        }
        Ok(x.clamp(self.s, self.c))
    }

    /// The other solution `ξ ∈ [−√β, √β]` of `F(ξ) = F(x)`.
    pub fn rho_y(&self, x: f64) -> Result<f64> {
        let x = self.check_domain(x)?;
        let level = self.potential(x);
        // x³/3 − βx + c0 = (x + √β)²(x − 2√β)/3, exact zero at a.
        let s = self.s;
        let g = |xi: f64| (xi + s) * (xi + s) * (xi - 2.0 * s) / 3.0 + self.bump.value(xi) - level;
        if g(-self.s) <= 0.0 {
            return Ok(-self.s);
        }
        if g(self.s) >= 0.0 {
            return Ok(self.s);
        }
        Ok(bisect(g, -self.s, self.s))
    }

    /// `ρ_Y'(x) = F'(x)/F'(ρ_Y(x))`, with the one-sided limit
    /// `−√(F''(√β⁺)/F''(√β⁻))` at the two-fold end.
    pub fn rho_y_d1(&self, x: f64) -> Result<f64> {
        let rho = self.rho_y(x)?;
        if x - self.s <= 1e-9 * self.s {
            let right = potential_f2(&self.bump, self.s + 1e-12 * self.s.max(1e-300));
            let left = 2.0 * self.s;
            return Ok(-(right / left).sqrt());
        }
        let (_, fx) = potential_f(&self.bump, x);
        let (_, fr) = potential_f(&self.bump, rho);
        Ok(fx / fr)
    }

    fn rho_y_d2(&self, x: f64, rho: f64, d1: f64) -> f64 {
        let (_, fr) = potential_f(&self.bump, rho);
        (potential_f2(&self.bump, x) - potential_f2(&self.bump, rho) * d1 * d1) / fr
    }

    pub fn psi(&self, x: f64) -> Result<f64> {
        Ok(rho_x(self.lambda, self.rho_y(x)?))
    }

    pub fn psi_d1(&self, x: f64) -> Result<f64> {
        Ok(-self.rho_y_d1(x)?)
    }

    /// `σ(x) = (x + ρ_Y(x))/2`; `ψ(x) = x` iff `σ(x) = λ`.
    pub fn sigma(&self, x: f64) -> Result<f64> {
        Ok(0.5 * (x + self.rho_y(x)?))
    }

    /// Maximizer `x*` of `σ` and `L1 = σ(x*)`: the `λ` at which the two
    /// interior fixed points of `ψ` merge (`ψ(x*) = x*`, `ψ'(x*) = 1`).
    pub fn sigma_max(&self) -> Result<(f64, f64)> {
        let (lo, hi) = self.domain();
        let n = FIXED_POINT_CELLS;
        let h = (hi - lo) / n as f64;
        let mut best = (lo, f64::NEG_INFINITY);
        for i in 1..n {
            let x = lo + h * i as f64;
            let v = self.sigma(x)?;
            if v > best.1 {
                best = (x, v);
            }
        }
        // Damped Newton on g = 1 + ρ_Y' (i.e. σ' = 0).
        let mut x = best.0;
        let g_at = |x: f64| -> Result<(f64, f64)> {
            let rho = self.rho_y(x)?;
            let d1 = self.rho_y_d1(x)?;
            Ok((1.0 + d1, self.rho_y_d2(x, rho, d1)))
        };
        let (mut g, mut dg) = g_at(x)?;
        for _ in 0..100 {
            if g.abs() < 1e-14 {
                break;
            }
            let mut step = -g / dg;
            let mut moved = false;
            for _ in 0..40 {
                let xn = x + step;
                if xn > lo && xn < hi {
                    let (gn, dgn) = g_at(xn)?;
                    if gn.abs() < g.abs() {
                        x = xn;
                        g = gn;
                        dg = dgn;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if g.abs() > 1e-9 {
            return Err(Error::NotFound(format!(
                "maximum of sigma: Newton residual {g:e} at x = {x}"
            )));
        }
        Ok((x, self.sigma(x)?))
    }

    /// `σ` sampled over the domain with the maximizer inserted, for
    /// repeated fixed-point counts at many `λ`.
    pub fn sigma_profile(&self) -> Result<SigmaProfile> {
        let (lo, hi) = self.domain();
        let (x_star, l1) = self.sigma_max()?;
        let n = FIXED_POINT_CELLS;
        let h = (hi - lo) / n as f64;
        let mut xs = Vec::with_capacity(n + 2);
        for i in 0..=n {
            let x = lo + h * i as f64;
            if xs.last().is_some_and(|&p| p < x_star) && x > x_star {
                xs.push(x_star);
            }
            if x != x_star {
                xs.push(x);
            }
        }
        let sig = xs
            .iter()
            .map(|&x| self.sigma(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(SigmaProfile {
            s: self.s,
            c: self.c,
            xs,
            sig,
            x_star,
            l1,
        })
    }

    pub fn section_map(&self) -> SectionMap {
        let m = self.clone();
        SectionMap::new(
            self.domain(),
            Provenance::ClosedForm,
            Arc::new(move |x| m.psi(x)),
        )
    }

    /// Kind-III cycle through `a` and `c`, if any: the `X`-arc through `c`
    /// lands at `q'' = 2λ − c`; the cycle closes through an escaping segment
    /// `[q'', a]` (or directly, as a loop, when `q'' = a`).
    pub fn kind_three(&self, window: &Window) -> Option<CycleSummary> {
        let tol = window.coincidence_tol();
        let a = -self.s;
        let q = rho_x(self.lambda, self.c);
        if (q - a).abs() <= tol {
            return Some(CycleSummary {
                kind: CycleKind::III,
                stability: CycleStability::Repelling,
                hyperbolic: Some(false),
                anchor: a,
                multiplier: None,
            });
        }
        if q > a || !window.contains_x(q) {
            return None;
        }
        let n = 256;
        let h_num = |x: f64| {
            let (xf, yf) = (self.lambda - x, -potential_f(&self.bump, x).1);
            (xf, yf)
        };
        for i in 1..n {
            let x = q + (a - q) * i as f64 / n as f64;
            let (xf, yf) = h_num(x);
            if open_region(xf, yf) != Some(SigmaPointClass::Escaping) || xf + yf <= 0.0 {
                return None;
            }
        }
        // A zero of X.f + Y.f (the numerator of H) in the segment stops the
        // sliding motion; the sample check above misses only close pairs.
        let roots = scan_roots(
            |x| {
                let (xf, yf) = h_num(x);
                xf + yf
            },
            q,
            a - tol,
            n,
            LIE_TOL,
        );
        if !roots.is_empty() {
            return None;
        }
        let touches_sliding = (self.lambda - a).abs() <= tol;
        Some(CycleSummary {
            kind: CycleKind::III,
            stability: CycleStability::Repelling,
            hyperbolic: Some(!touches_sliding),
            anchor: a,
            multiplier: None,
        })
    }

    /// Cycle census from the closed forms (kind I from `σ`, kind III from
    /// the landing point of `c`).
    pub fn closed_form_census(
        &self,
        profile: &SigmaProfile,
        window: &Window,
    ) -> Vec<CycleSummary> {
        let mut out = profile.kind_one(self.lambda, window.coincidence_tol());
        out.extend(self.kind_three(window));
        out.sort_by(|a, b| a.anchor.total_cmp(&b.anchor));
        out
    }
}

/// `ρ_Y(x)` for the invisible unfolding with the constructed bump.
pub fn rho_y(params: FoldCuspParams, x: f64) -> Result<f64> {
    InvisibleMaps::new(params)?.rho_y(x)
}

/// `ψ(x) = 2λ − ρ_Y(x)`.
pub fn first_return_psi(params: FoldCuspParams, x: f64) -> Result<f64> {
    InvisibleMaps::new(params)?.psi(x)
}

/// `σ` on a grid of its domain; independent of `λ`.
#[derive(Debug, Clone)]
pub struct SigmaProfile {
    pub s: f64,
    pub c: f64,
    pub xs: Vec<f64>,
    pub sig: Vec<f64>,
    pub x_star: f64,
    pub l1: f64,
}

impl SigmaProfile {
    /// Kind-I cycles at `λ`: interior solutions of `σ(x) = λ`. Rising
    /// crossings are attracting, falling ones repelling; `|λ − L1| ≤ tol`
    /// gives the single semi-stable cycle.
    pub fn kind_one(&self, lambda: f64, tol: f64) -> Vec<CycleSummary> {
        let summary = |anchor: f64, stability, hyperbolic| CycleSummary {
            kind: CycleKind::I,
            stability,
            hyperbolic: Some(hyperbolic),
            anchor,
            multiplier: None,
        };
        if (lambda - self.l1).abs() <= tol {
            return vec![summary(self.x_star, CycleStability::TwoSided, false)];
        }
        let mut out = Vec::new();
        // A root in an end cell with `λ ≈ σ(end)` is the endpoint fixed
        // point (two-fold or loop), not a cycle. `σ` has unbounded slope at
        // `c`, so the test is on `λ`, not on the distance to the end.
        let last = self.xs.len() - 2;
        let at_lo = (lambda - self.sig[0]).abs() <= tol;
        let at_hi = (lambda - self.sig[last + 1]).abs() <= tol;
        for i in 0..=last {
            if (i == 0 && at_lo) || (i == last && at_hi) {
                continue;
            }
            let (g0, g1) = (self.sig[i] - lambda, self.sig[i + 1] - lambda);
            if g0 < 0.0 && g1 >= 0.0 || g0 >= 0.0 && g1 < 0.0 {
                let t = g0 / (g0 - g1);
                let x = self.xs[i] + t * (self.xs[i + 1] - self.xs[i]);
                let st = if g1 > g0 {
                    CycleStability::Attracting
                } else {
                    CycleStability::Repelling
                };
                out.push(summary(x, st, true));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    ClosedForm,
    FlowComposed,
}

type MapFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// A map between abscissas of `Σ` on an open interval.
#[derive(Clone)]
pub struct SectionMap {
    pub domain: (f64, f64),
    pub provenance: Provenance,
    eval: MapFn,
}

impl std::fmt::Debug for SectionMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SectionMap")
            .field("domain", &self.domain)
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}

impl SectionMap {
    pub fn new(domain: (f64, f64), provenance: Provenance, eval: MapFn) -> Self {
        Self {
            domain,
            provenance,
            eval,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        (self.eval)(x)
    }

    /// Strictly increasing at `samples` interior points.
    pub fn is_increasing(&self, samples: usize) -> Result<bool> {
        let (lo, hi) = self.domain;
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=samples {
            let v = self.eval(lo + (hi - lo) * i as f64 / (samples + 1) as f64)?;
            if v <= prev {
                return Ok(false);
            }
            prev = v;
        }
        Ok(true)
    }

    /// `ψ = ρ_X ∘ ρ_Y` of the invisible unfolding composed from flows,
    /// for cross-checking the closed form.
    pub fn flow_composed_psi(z: &FilippovSystem, window: Window) -> Result<Self> {
        let maps = InvisibleMaps::from_system(z).ok_or_else(|| {
            Error::InvalidParameters("flow-composed psi needs the invisible family, beta > 0".into())
        })?;
        let z = z.clone();
        let opts = FlowOptions::new(window);
        Ok(Self::new(
            maps.domain(),
            Provenance::FlowComposed,
            Arc::new(move |x| {
                let miss = || Error::NotFound(format!("half return from x = {x}"));
                let (rho, _) = half_return_flow(&z, FieldTag::Y, x, &opts)?.ok_or_else(miss)?;
                let (back, _) = half_return_flow(&z, FieldTag::X, rho, &opts)?.ok_or_else(miss)?;
                Ok(back)
            }),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FixedPointStability {
    Attracting,
    Repelling,
    NonHyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointRecord {
    pub location: f64,
    pub multiplier: f64,
    pub stability: FixedPointStability,
    /// `|ψ(x) − x|`.
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FixedPoints {
    pub interior: Vec<FixedPointRecord>,
    /// Fixed points at the ends of the domain (one-sided multipliers).
    pub endpoints: Vec<FixedPointRecord>,
}

fn stability_of(m: f64) -> FixedPointStability {
    if (m.abs() - 1.0).abs() < HYPERBOLICITY_BAND {
        FixedPointStability::NonHyperbolic
    } else if m.abs() < 1.0 {
        FixedPointStability::Attracting
    } else {
        FixedPointStability::Repelling
    }
}

/// Multiplier by central difference, one-sided within `FD_STEP` of an end.
fn multiplier(map: &SectionMap, x: f64) -> Result<f64> {
    let (lo, hi) = map.domain;
    let h = FD_STEP.min(0.25 * (hi - lo));
    let (a, b) = ((x - h).max(lo), (x + h).min(hi));
    if b <= a {
        return Err(Error::Domain {
            what: "x",
            value: x,
            domain: format!("({lo}, {hi})"),
        });
    }
    Ok((map.eval(b)? - map.eval(a)?) / (b - a))
}

/// All fixed points of `map` on its domain.
pub fn fixed_points(map: &SectionMap) -> Result<FixedPoints> {
    let (lo, hi) = map.domain;
    let failed = Cell::new(None::<f64>);
    let g = |x: f64| match map.eval(x) {
        Ok(v) => v - x,
        Err(_) => {
            failed.set(Some(x));
            f64::NAN
        }
    };
    let roots = scan_roots(g, lo, hi, FIXED_POINT_CELLS, 1e-10);
    if let Some(x) = failed.get() {
        return Err(Error::NotFound(format!("section map undefined at x = {x}")));
    }
    let end_tol = 1e-9 * (1.0 + hi.abs().max(lo.abs()));
    let mut out = FixedPoints::default();
    for root in roots {
        let x = root.x;
        let residual = (map.eval(x)? - x).abs();
        let m = multiplier(map, x)?;
        let rec = FixedPointRecord {
            location: x,
            multiplier: m,
            stability: stability_of(m),
            residual,
        };
        if x - lo <= end_tol || hi - x <= end_tol {
            out.endpoints.push(rec);
        } else {
            out.interior.push(rec);
        }
    }
    for e in [lo, hi] {
        if out.endpoints.iter().any(|r| (r.location - e).abs() <= end_tol) {
            continue;
        }
        // At `c` the landing point sits on a quadratic fold, which turns
        // rounding in `F` into a √ε-sized error.
        let residual = (map.eval(e)? - e).abs();
        if residual < ENDPOINT_TOL {
            let m = multiplier(map, e)?;
            out.endpoints.push(FixedPointRecord {
                location: e,
                multiplier: m,
                stability: stability_of(m),
                residual,
            });
        }
    }
    out.endpoints.sort_by(|a, b| a.location.total_cmp(&b.location));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CycleKind {
    I,
    II,
    III,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CycleStability {
    Attracting,
    Repelling,
    /// Attracting on one side, repelling on the other.
    TwoSided,
}

/// Kind, stability and a `Σ`-anchor of a cycle, without its arcs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleSummary {
    pub kind: CycleKind,
    pub stability: CycleStability,
    /// `None` when the hyperbolicity test was inconclusive.
    pub hyperbolic: Option<bool>,
    /// Crossing point on `Σ` (kind I) or the visible fold (kind III).
    pub anchor: f64,
    pub multiplier: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanardCycle {
    pub arcs: Vec<OrbitArc>,
    pub kind: CycleKind,
    pub hyperbolic: Option<bool>,
    pub stability: CycleStability,
    pub anchor: f64,
    pub multiplier: Option<f64>,
    /// Distance between the start and the end of the concatenated arcs.
    pub closure_gap: f64,
}

impl CanardCycle {
    pub fn summary(&self) -> CycleSummary {
        CycleSummary {
            kind: self.kind,
            stability: self.stability,
            hyperbolic: self.hyperbolic,
            anchor: self.anchor,
            multiplier: self.multiplier,
        }
    }
}

/// Tight tolerances for closing cycles: shallow crossings near a fold
/// amplify the vertical error by `1/|W.f|`.
fn closing_options(window: Window) -> FlowOptions {
    let mut opts = FlowOptions::new(window);
    opts.atol = 1e-13;
    opts.rtol = 1e-12;
    opts
}

fn gap(arcs: &[OrbitArc]) -> f64 {
    match (arcs.first().and_then(|a| a.start()), arcs.last().and_then(|a| a.end())) {
        (Some(p), Some(q)) => (p - q).norm(),
        _ => f64::INFINITY,
    }
}

/// Every trajectory moves monotonically in `x` when the horizontal
/// components of `X`, `Y` and `Z^Σ` share one strict sign; then no closed
/// orbit can exist.
pub fn monotone_abscissa(z: &FilippovSystem, window: &Window) -> bool {
    let r = window.radius;
    let n = 16;
    let mut sign = 0.0;
    let mut agree = |v: f64| {
        if v.abs() <= LIE_TOL {
            return false;
        }
        if sign == 0.0 {
            sign = v.signum();
        }
        v.signum() == sign
    };
    for i in 0..=n {
        for j in 0..=n {
            let x = -r + 2.0 * r * i as f64 / n as f64;
            let y = r * j as f64 / n as f64;
            if !agree(z.x.eval(Point2::new(x, y)).x) || !agree(z.y.eval(Point2::new(x, -y)).x) {
                return false;
            }
        }
    }
    let m = 1024;
    for i in 0..=m {
        let x = -r + 2.0 * r * i as f64 / m as f64;
        let (xf, yf) = z.lie_pair(x);
        if matches!(
            open_region(xf, yf),
            Some(SigmaPointClass::Sliding | SigmaPointClass::Escaping)
        ) {
            match direction_function(z, x).value {
                Some(h) if agree(h) => {}
                _ => return false,
            }
        }
    }
    true
}

/// Kind-I cycles of the invisible unfolding from the closed-form `ψ`,
/// realized as `Y`/`X` arc pairs by flowing.
fn kind_one_cycles(
    z: &FilippovSystem,
    maps: &InvisibleMaps,
    window: &Window,
) -> Result<Vec<CanardCycle>> {
    let fps = fixed_points(&maps.section_map())?;
    let opts = closing_options(*window);
    let mut out = Vec::new();
    for fp in fps.interior {
        let x = fp.location;
        let Some((rho, ya)) = half_return_flow(z, FieldTag::Y, x, &opts)? else {
            continue;
        };
        let Some((_, xa)) = half_return_flow(z, FieldTag::X, rho, &opts)? else {
            continue;
        };
        let arcs = vec![ya, xa];
        let stability = match fp.stability {
            FixedPointStability::Attracting => CycleStability::Attracting,
            FixedPointStability::Repelling => CycleStability::Repelling,
            FixedPointStability::NonHyperbolic => CycleStability::TwoSided,
        };
        out.push(CanardCycle {
            closure_gap: gap(&arcs),
            arcs,
            kind: CycleKind::I,
            hyperbolic: Some(fp.stability != FixedPointStability::NonHyperbolic),
            stability,
            anchor: x,
            multiplier: Some(fp.multiplier),
        });
    }
    Ok(out)
}

/// `true` when a point of `Γ ∩ Σ` lies in `closure(Σe) ∩ closure(Σs)`.
fn touches_both_sliding_kinds(z: &FilippovSystem, xs: &[f64], window: &Window) -> bool {
    let d = 0.5 * window.coincidence_tol();
    xs.iter().any(|&x| {
        let l = z.lie_pair(x - d);
        let r = z.lie_pair(x + d);
        let (l, r) = (open_region(l.0, l.1), open_region(r.0, r.1));
        matches!(
            (l, r),
            (Some(SigmaPointClass::Sliding), Some(SigmaPointClass::Escaping))
                | (Some(SigmaPointClass::Escaping), Some(SigmaPointClass::Sliding))
        )
    })
}

/// Kind-III cycles through the visible folds: follow the trajectory of
/// `−Z` (and of `Z`) from each fold and keep it when it returns there.
fn kind_three_cycles(z: &FilippovSystem, window: &Window) -> Result<Vec<CanardCycle>> {
    let tol = window.coincidence_tol().max(CLOSURE_TOL);
    let mut out: Vec<CanardCycle> = Vec::new();
    let folds: Vec<f64> = find_tangencies(z, window)
        .into_iter()
        .filter(|t| t.kind == TangencyKind::FoldVisible && t.owner != TangencyOwner::Both)
        .map(|t| t.location)
        .collect();
    for q in folds {
        if out.iter().any(|c| (c.anchor - q).abs() <= tol) {
            continue;
        }
        let start = Point2::new(q, 0.0);
        for direction in [TimeDirection::Backward, TimeDirection::Forward] {
            let mut opts = SimOptions::new(*window);
            opts.max_events = 64;
            opts.stop_near = Some((start, CLOSURE_TOL));
            let Ok(traj) = simulate_with(z, start, opts.flow.t_max, direction, &opts) else {
                continue;
            };
            let Some(last) = traj.last_event() else {
                continue;
            };
            let closure_gap = (last.point - start).norm();
            if closure_gap > CLOSURE_TOL || traj.arcs.is_empty() {
                continue;
            }
            let mut arcs = traj.arcs.clone();
            if direction == TimeDirection::Backward {
                arcs = arcs.iter().rev().map(OrbitArc::reversed).collect();
            }
            let mut hits: Vec<f64> = traj.events.iter().map(|e| e.point.x).collect();
            hits.push(q);
            let sliding: Vec<&OrbitArc> =
                arcs.iter().filter(|a| a.field_tag == FieldTag::Sliding).collect();
            let mut kinds = Vec::new();
            for arc in &sliding {
                let (Some(p), Some(e)) = (arc.start(), arc.end()) else {
                    continue;
                };
                hits.push(p.x);
                hits.push(e.x);
                let (xf, yf) = z.lie_pair(0.5 * (p.x + e.x));
                kinds.extend(open_region(xf, yf));
            }
            let (stability, hyperbolic) = if sliding.is_empty() {
                loop_verdict(z)
            } else if kinds.iter().all(|k| *k == SigmaPointClass::Escaping) {
                (CycleStability::Repelling, Some(!touches_both_sliding_kinds(z, &hits, window)))
            } else if kinds.iter().all(|k| *k == SigmaPointClass::Sliding) {
                (CycleStability::Attracting, Some(!touches_both_sliding_kinds(z, &hits, window)))
            } else {
                (CycleStability::TwoSided, Some(false))
            };
            out.push(CanardCycle {
                closure_gap: gap(&arcs).min(closure_gap),
                arcs,
                kind: CycleKind::III,
                hyperbolic,
                stability,
                anchor: q,
                multiplier: None,
            });
            break;
        }
    }
    Ok(out)
}

/// A loop through a visible fold without sliding segments is never
/// hyperbolic; for the invisible unfolding the inner return map near `c`
/// has unbounded slope, so it repels from inside.
fn loop_verdict(z: &FilippovSystem) -> (CycleStability, Option<bool>) {
    match InvisibleMaps::from_system(z) {
        Some(_) => (CycleStability::Repelling, Some(false)),
        None => (CycleStability::TwoSided, None),
    }
}

/// Canard cycles of `z` inside `window`, sorted by kind then anchor.
///
/// Kind II would need `Σ` itself to be a closed invariant curve; the
/// switching line is not closed, so it never occurs here.
pub fn detect_canard_cycles(z: &FilippovSystem, window: &Window) -> Result<Vec<CanardCycle>> {
    if monotone_abscissa(z, window) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    if let Some(maps) = InvisibleMaps::from_system(z) {
        out.extend(kind_one_cycles(z, &maps, window)?);
    } else {
        out.extend(generic_kind_one(z, window)?);
    }
    out.extend(kind_three_cycles(z, window)?);
    out.sort_by(|a, b| a.kind.cmp(&b.kind).then(a.anchor.total_cmp(&b.anchor)));
    Ok(out)
}

/// Kind-I cycles of a general system: fixed points of the flow-composed
/// return `Y` then `X` from downward crossing points.
fn generic_kind_one(z: &FilippovSystem, window: &Window) -> Result<Vec<CanardCycle>> {
    let r = window.radius;
    let opts = closing_options(*window);
    let n = 256;
    let ret = |x: f64| -> Result<Option<f64>> {
        let (xf, yf) = z.lie_pair(x);
        if open_region(xf, yf) != Some(SigmaPointClass::Crossing) || xf > 0.0 {
            return Ok(None);
        }
        let Some((rho, _)) = half_return_flow(z, FieldTag::Y, x, &opts)? else {
            return Ok(None);
        };
        let (xf, yf) = z.lie_pair(rho);
        if open_region(xf, yf) != Some(SigmaPointClass::Crossing) || xf < 0.0 {
            return Ok(None);
        }
        Ok(half_return_flow(z, FieldTag::X, rho, &opts)?.map(|(p, _)| p))
    };
    let xs: Vec<f64> = (0..=n).map(|i| -r + 2.0 * r * i as f64 / n as f64).collect();
    let gs = xs
        .iter()
        .map(|&x| Ok(ret(x)?.map(|p| p - x)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 0..n {
        let (Some(g0), Some(g1)) = (gs[i], gs[i + 1]) else {
            continue;
        };
        if g0 * g1 > 0.0 {
            continue;
        }
        let g = |x: f64| ret(x).ok().flatten().map_or(f64::NAN, |p| p - x);
        let x = bisect(g, xs[i], xs[i + 1]);
        let (Some(p1), Some(p0)) = (ret(x + FD_STEP)?, ret(x - FD_STEP)?) else {
            continue;
        };
        let m = (p1 - p0) / (2.0 * FD_STEP);
        let Some((rho, ya)) = half_return_flow(z, FieldTag::Y, x, &opts)? else {
            continue;
        };
        let Some((_, xa)) = half_return_flow(z, FieldTag::X, rho, &opts)? else {
            continue;
        };
        let arcs = vec![ya, xa];
        let st = stability_of(m);
        out.push(CanardCycle {
            closure_gap: gap(&arcs),
            arcs,
            kind: CycleKind::I,
            hyperbolic: Some(st != FixedPointStability::NonHyperbolic),
            stability: match st {
                FixedPointStability::Attracting => CycleStability::Attracting,
                FixedPointStability::Repelling => CycleStability::Repelling,
                FixedPointStability::NonHyperbolic => CycleStability::TwoSided,
            },
            anchor: x,
            multiplier: Some(m),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{invisible_family, make_visible_family};

    fn maps(lambda: f64, beta: f64, mu: f64) -> InvisibleMaps {
        InvisibleMaps::new(FoldCuspParams::new(lambda, beta, mu)).unwrap()
    }

    #[test]
    fn fold_transition() {
        assert_eq!(fold_transition_xi(1.0, 0.5).unwrap(), 0.0);
        assert!((fold_transition_xi(2.0, 0.5).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!(fold_transition_xi(0.5, 0.5).is_err());
        assert_eq!(fold_transition_xi_inv_deriv(0.0, 0.5).unwrap(), 0.0);
        let x = 0.37;
        let back = fold_transition_xi(fold_transition_xi_inv(x, 0.2).unwrap(), 0.2).unwrap();
        assert!((back - x).abs() < 1e-15);
    }

    #[test]
    fn reflection_map() {
        assert_eq!(rho_x(1.0, -1.0), 3.0);
        assert_eq!(rho_x(0.7, 0.7), 0.7);
        assert_eq!(rho_x(0.0, 0.5), -0.5);
    }

    #[test]
    fn rho_y_examples() {
        let m = maps(1.0, 1.0, 0.0);
        // F(ξ) − F(c) ≈ (ξ + 1)² near a: √ε conditioning.
        assert!((m.rho_y(3.0).unwrap() + 1.0).abs() < 1e-7);
        assert!((m.rho_y(1.0).unwrap() - 1.0).abs() < 1e-12);
        let r = m.rho_y(2.0).unwrap();
        assert!(r > -1.0 && r < 1.0);
        assert!((m.potential(r) - m.potential(2.0)).abs() < 1e-10);
        assert!(m.rho_y(0.5).is_err());
    }

    #[test]
    fn psi_examples() {
        let m = maps(1.0, 1.0, 0.0);
        assert!((m.psi(1.0 + 1e-12).unwrap() - 1.0).abs() < 1e-6);
        assert!((m.psi(3.0).unwrap() - 3.0).abs() < 1e-7);
        assert!(m.psi(2.0).unwrap() < 2.0);
        assert!(m.section_map().is_increasing(512).unwrap());
    }

    #[test]
    fn endpoint_multiplier_is_curvature_ratio() {
        let m = maps(1.0, 1.0, 0.0);
        let h = 1e-7;
        let one_sided = (m.psi(1.0 + h).unwrap() - m.psi(1.0).unwrap()) / h;
        let expected = 0.5f64.sqrt();
        assert!((one_sided.abs() - expected).abs() < 0.05 * expected, "{one_sided}");
        assert!((m.psi_d1(1.0).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn closed_form_matches_flows() {
        let z = invisible_family(FoldCuspParams::new(1.3, 1.0, 0.0)).unwrap();
        let w = Window::new(6.0);
        let flow = SectionMap::flow_composed_psi(&z, w).unwrap();
        let closed = InvisibleMaps::from_system(&z).unwrap().section_map();
        for i in 1..16 {
            let x = 1.0 + 2.0 * i as f64 / 16.0;
            let (a, b) = (closed.eval(x).unwrap(), flow.eval(x).unwrap());
            assert!((a - b).abs() < 1e-7, "x = {x}: {a} vs {b}");
        }
    }

    #[test]
    fn fixed_points_between_two_fold_and_l1() {
        let (x_star, l1) = maps(0.0, 1.0, 0.0).sigma_max().unwrap();
        assert!(l1 > 1.0 && l1 < 2.0 && x_star > 1.0 && x_star < 3.0);
        let fp = fixed_points(&maps(0.5 * (1.0 + l1), 1.0, 0.0).section_map()).unwrap();
        assert_eq!(fp.interior.len(), 2);
        assert_eq!(fp.interior[0].stability, FixedPointStability::Attracting);
        assert_eq!(fp.interior[1].stability, FixedPointStability::Repelling);
        assert!(fp.interior.iter().all(|r| r.residual < 1e-9));

        let fp = fixed_points(&maps(l1, 1.0, 0.0).section_map()).unwrap();
        assert_eq!(fp.interior.len(), 1);
        assert!((fp.interior[0].multiplier.abs() - 1.0).abs() < 1e-3);

        let fp = fixed_points(&maps(1.0, 1.0, 0.0).section_map()).unwrap();
        assert!(fp.interior.is_empty());
        assert_eq!(fp.endpoints.len(), 2);
    }

    #[test]
    fn profile_census_matches_fixed_points() {
        let base = maps(0.0, 1.0, 0.0);
        let prof = base.sigma_profile().unwrap();
        for lambda in [0.5, 1.05, 1.1, 1.15, prof.l1 - 1e-3, prof.l1 + 1e-3, 1.9] {
            let k = prof.kind_one(lambda, 1e-7);
            let fp = fixed_points(&base.with_lambda(lambda).section_map()).unwrap();
            assert_eq!(k.len(), fp.interior.len(), "lambda = {lambda}");
        }
    }

    #[test]
    fn kind_three_by_flow_and_closed_form() {
        let w_small = |z: &FilippovSystem| z.default_window();
        // Case 7 representative.
        let z = invisible_family(FoldCuspParams::new(-0.1, 0.04, 0.0)).unwrap();
        let w = w_small(&z);
        let cycles = detect_canard_cycles(&z, &w).unwrap();
        assert_eq!(cycles.len(), 1, "{cycles:?}");
        let c = &cycles[0];
        assert_eq!(c.kind, CycleKind::III);
        assert_eq!(c.stability, CycleStability::Repelling);
        assert_eq!(c.hyperbolic, Some(true));
        assert!(c.closure_gap < CLOSURE_TOL);
        let m = InvisibleMaps::from_system(&z).unwrap();
        assert_eq!(m.kind_three(&w).unwrap().stability, CycleStability::Repelling);

        // Degenerate loop at λ = √β.
        let z = invisible_family(FoldCuspParams::new(1.0, 1.0, 0.0)).unwrap();
        let cycles = detect_canard_cycles(&z, &z.default_window()).unwrap();
        assert_eq!(cycles.len(), 1, "{cycles:?}");
        assert_eq!(cycles[0].kind, CycleKind::III);
        assert_eq!(cycles[0].hyperbolic, Some(false));
        assert_eq!(cycles[0].stability, CycleStability::Repelling);
    }

    #[test]
    fn kind_three_blocked_by_pseudo_equilibrium_at_unit_beta() {
        // The escaping segment [2λ − c, a] contains a zero of H.
        let z = invisible_family(FoldCuspParams::new(-0.5, 1.0, 0.0)).unwrap();
        let w = z.default_window();
        assert!(InvisibleMaps::from_system(&z).unwrap().kind_three(&w).is_none());
        assert!(detect_canard_cycles(&z, &w).unwrap().is_empty());
    }

    #[test]
    fn no_cycles() {
        let z = invisible_family(FoldCuspParams::new(0.0, -1.0, 0.0)).unwrap();
        assert!(detect_canard_cycles(&z, &z.default_window()).unwrap().is_empty());
        let z = make_visible_family(0.0, 1.0);
        assert!(monotone_abscissa(&z, &z.default_window()));
        assert!(detect_canard_cycles(&z, &z.default_window()).unwrap().is_empty());
    }

    #[test]
    fn kind_one_cycles_realized() {
        let (_, l1) = maps(0.0, 1.0, 0.0).sigma_max().unwrap();
        let z = invisible_family(FoldCuspParams::new(0.5 * (1.0 + l1), 1.0, 0.0)).unwrap();
        let cycles = detect_canard_cycles(&z, &z.default_window()).unwrap();
        let one: Vec<_> = cycles.iter().filter(|c| c.kind == CycleKind::I).collect();
        assert_eq!(one.len(), 2);
        assert!(one.iter().all(|c| c.closure_gap < CLOSURE_TOL));
        assert_eq!(one[0].stability, CycleStability::Attracting);
        assert_eq!(one[1].stability, CycleStability::Repelling);
    }
}
