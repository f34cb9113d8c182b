//! Dynamics on `Σ`: region classification, the Filippov sliding field, the
//! direction function `H`, tangencies and pseudo-equilibria.
//!
//! With `D = X(q)`, `E = Y(q)` and `f = y`, the direction function is
//! `H = (E₂D₁ - D₂E₁)/(E₂ - D₂)`. Its numerator is the cross product
//! `D × E` and its denominator is `Y.f - X.f`, so the sliding field
//! `Z^Σ = (Y.f·X - X.f·Y)/(Y.f - X.f)` has first component exactly `H`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::documented_cusp_kind;
use crate::planefield::{FieldTag, Vec2, Window};
use crate::roots::{scan_roots, Root};
use crate::system::{Family, FilippovSystem};

/// Magnitude below which a Lie derivative counts as zero.
pub const LIE_TOL: f64 = 1e-9;
/// Grid used by every scan along `Σ`.
pub const SCAN_CELLS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SigmaPointClass {
    Crossing,
    Sliding,
    Escaping,
    TangentialSingularity,
    PseudoEquilibrium,
    BoundaryPoint,
}

impl SigmaPointClass {
    pub fn short(self) -> &'static str {
        match self {
            SigmaPointClass::Crossing => "c",
            SigmaPointClass::Sliding => "s",
            SigmaPointClass::Escaping => "e",
            SigmaPointClass::TangentialSingularity => "t",
            SigmaPointClass::PseudoEquilibrium => "p",
            SigmaPointClass::BoundaryPoint => "b",
        }
    }
}

/// Open-region class from the signs of `X.f` and `Y.f` only; `None` when
/// either is inside the tolerance band.
pub fn open_region(xf: f64, yf: f64) -> Option<SigmaPointClass> {
    if xf.abs() <= LIE_TOL || yf.abs() <= LIE_TOL {
        None
    } else if xf * yf > 0.0 {
        Some(SigmaPointClass::Crossing)
    } else if xf < 0.0 {
        Some(SigmaPointClass::Sliding)
    } else {
        Some(SigmaPointClass::Escaping)
    }
}

pub fn classify_sigma_point(z: &FilippovSystem, x: f64) -> SigmaPointClass {
    let (xf, yf) = z.lie_pair(x);
    let dir = direction_function(z, x);
    match open_region(xf, yf) {
        Some(SigmaPointClass::Crossing) => SigmaPointClass::Crossing,
        Some(region) => match dir.value {
            Some(h) if h.abs() <= LIE_TOL => SigmaPointClass::PseudoEquilibrium,
            _ => region,
        },
        None => {
            if xf.abs() <= LIE_TOL && yf.abs() <= LIE_TOL {
                return SigmaPointClass::BoundaryPoint;
            }
            match dir.value {
                Some(h) if h.abs() > LIE_TOL => SigmaPointClass::TangentialSingularity,
                Some(_) => SigmaPointClass::PseudoEquilibrium,
                None => SigmaPointClass::BoundaryPoint,
            }
        }
    }
}

/// `H`, with numerator `D × E` and denominator `E₂ - D₂`. `value` is
/// `None` where the denominator vanishes (`r(q) ∩ Σ = ∅`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionValue {
    pub numerator: f64,
    pub denominator: f64,
    pub value: Option<f64>,
}

pub fn direction_function(z: &FilippovSystem, x: f64) -> DirectionValue {
    let (d, e) = z.fields_on_sigma(x);
    let (d2, e2) = z.lie_pair(x);
    let numerator = e2 * d.x - d2 * e.x;
    let denominator = e2 - d2;
    let scale = 1e-15 * (d2.abs() + e2.abs());
    let value = (denominator.abs() > scale && denominator != 0.0).then(|| numerator / denominator);
    DirectionValue {
        numerator,
        denominator,
        value,
    }
}

/// `Z^Σ(q) = (Y.f·X - X.f·Y)/(Y.f - X.f)` at `q = (x, 0)`.
pub fn sliding_field(z: &FilippovSystem, x: f64) -> Result<Vec2> {
    let (d, e) = z.fields_on_sigma(x);
    let (d2, e2) = z.lie_pair(x);
    let dir = direction_function(z, x);
    let Some(h) = dir.value else {
        return Err(Error::SingularSlidingField { x });
    };
    Ok(Vec2::new(h, (e2 * d.y - d2 * e.y) / dir.denominator))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TangencyKind {
    FoldVisible,
    FoldInvisible,
    CuspKind1,
    CuspKind2,
    FoldCusp,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TangencyOwner {
    X,
    Y,
    /// Fold of one field and cusp of the other at the same abscissa.
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tangency {
    pub owner: TangencyOwner,
    pub location: f64,
    pub kind: TangencyKind,
    /// `[W.f, W².f, W³.f]` of the owning field (zeros for `Both`).
    pub lie: [f64; 3],
    /// Set when a documented label for this system disagrees with the
    /// computed one.
    pub discrepancy: Option<String>,
}

/// Classifies a zero of `W.f` from `[W.f, W².f, W³.f]`.
///
/// A fold is *visible* when the tangent orbit stays in the owning field's
/// half-plane: `X².f > 0` for `X` (above `Σ`), `Y².f < 0` for `Y` (below).
/// Cusp kinds use the raw sign of `W³.f`.
pub fn classify_tangency(owner: FieldTag, lie: [f64; 3]) -> TangencyKind {
    let [_, l2, l3] = lie;
    if l2.abs() > LIE_TOL {
        let stays = match owner {
            FieldTag::Y => l2 < 0.0,
            _ => l2 > 0.0,
        };
        if stays {
            TangencyKind::FoldVisible
        } else {
            TangencyKind::FoldInvisible
        }
    } else if l3.abs() > LIE_TOL {
        if l3 > 0.0 {
            TangencyKind::CuspKind1
        } else {
            TangencyKind::CuspKind2
        }
    } else {
        TangencyKind::Degenerate
    }
}

fn is_fold(k: TangencyKind) -> bool {
    matches!(k, TangencyKind::FoldVisible | TangencyKind::FoldInvisible)
}

fn is_cusp(k: TangencyKind) -> bool {
    matches!(k, TangencyKind::CuspKind1 | TangencyKind::CuspKind2)
}

/// Roots of a function on `Σ ∩ window`.
fn sigma_roots(g: impl Fn(f64) -> f64, window: &Window) -> Vec<Root> {
    let r = window.radius;
    scan_roots(g, -r, r, SCAN_CELLS, LIE_TOL)
}

/// All Σ-tangencies of `X` and `Y` in the window, sorted by abscissa.
pub fn find_tangencies(z: &FilippovSystem, window: &Window) -> Vec<Tangency> {
    let mut out = Vec::new();
    for owner in [FieldTag::X, FieldTag::Y] {
        let lie_fn = |x: f64| match owner {
            FieldTag::Y => z.lie_y(x),
            _ => z.lie_x(x),
        };
        let first = |x: f64| {
            let (xf, yf) = z.lie_pair(x);
            if owner == FieldTag::Y {
                yf
            } else {
                xf
            }
        };
        for root in sigma_roots(first, window) {
            let lie = lie_fn(root.x);
            let kind = classify_tangency(owner, lie);
            out.push(Tangency {
                owner: if owner == FieldTag::X {
                    TangencyOwner::X
                } else {
                    TangencyOwner::Y
                },
                location: root.x,
                kind,
                lie,
                discrepancy: None,
            });
        }
    }
    let tol = window.coincidence_tol();
    let mut combined = Vec::new();
    for t in out.iter().filter(|t| t.owner == TangencyOwner::X) {
        for u in out.iter().filter(|u| u.owner == TangencyOwner::Y) {
            let pair = (is_fold(t.kind) && is_cusp(u.kind)) || (is_cusp(t.kind) && is_fold(u.kind));
            if pair && (t.location - u.location).abs() <= tol {
                combined.push(Tangency {
                    owner: TangencyOwner::Both,
                    location: 0.5 * (t.location + u.location),
                    kind: TangencyKind::FoldCusp,
                    lie: [0.0; 3],
                    discrepancy: None,
                });
            }
        }
    }
    out.extend(combined);
    if let Family::Standard(rho) = &z.family {
        if let Some(documented) = documented_cusp_kind(*rho) {
            for t in out.iter_mut().filter(|t| t.owner == TangencyOwner::Y && is_cusp(t.kind)) {
                if t.kind != documented {
                    t.discrepancy = Some(format!(
                        "documented as {documented:?}, computed Y³.f = {} gives {:?}",
                        t.lie[2], t.kind
                    ));
                }
            }
        }
    }
    out.sort_by(|a, b| a.location.total_cmp(&b.location));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PseudoKind {
    SigmaSaddle,
    SigmaAttractor,
    SigmaRepeller,
    Virtual,
    /// Zero of `H` on a region boundary (within tolerance), not classified.
    BoundaryPoint,
    /// Zero of `H` in `Σs ∪ Σe` without a sign change.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PseudoEquilibrium {
    pub location: f64,
    pub kind: PseudoKind,
    /// Region of the root (`BoundaryPoint` when on a region boundary).
    pub region: SigmaPointClass,
}

impl PseudoEquilibrium {
    pub fn is_virtual(&self) -> bool {
        self.kind == PseudoKind::Virtual
    }
}

/// Region at `x` ignoring pseudo-equilibria: `BoundaryPoint` when either
/// Lie derivative is within tolerance.
fn region_at(z: &FilippovSystem, x: f64) -> SigmaPointClass {
    let (xf, yf) = z.lie_pair(x);
    open_region(xf, yf).unwrap_or(SigmaPointClass::BoundaryPoint)
}

/// Pseudo-equilibria (zeros of `H` in `Σs ∪ Σe`) and virtual ones (zeros of
/// the numerator or denominator of `H` in `Σc`), sorted by abscissa.
pub fn find_pseudo_equilibria(z: &FilippovSystem, window: &Window) -> Vec<PseudoEquilibrium> {
    let num = |x: f64| direction_function(z, x).numerator;
    let den = |x: f64| direction_function(z, x).denominator;
    let h = 2.0 * window.radius / SCAN_CELLS as f64;
    let den_roots = sigma_roots(den, window);
    let mut out = Vec::new();
    for root in h_zeros(num, &den_roots, window) {
        let x = root.x;
        let region = region_at(z, x);
        let kind = match region {
            SigmaPointClass::Crossing => PseudoKind::Virtual,
            SigmaPointClass::Sliding | SigmaPointClass::Escaping => {
                stability(z, x, h, region, root)
            }
            _ => PseudoKind::BoundaryPoint,
        };
        out.push(PseudoEquilibrium {
            location: x,
            kind,
            region,
        });
    }
    for root in den_roots {
        out.push(PseudoEquilibrium {
            location: root.x,
            kind: PseudoKind::Virtual,
            region: region_at(z, root.x),
        });
    }
    out.sort_by(|a, b| a.location.total_cmp(&b.location));
    out
}

/// Zeros of the numerator of `H` away from the zeros of its denominator;
/// where both vanish together only the virtual clause `r(q) ∩ Σ = ∅` applies.
fn h_zeros(num: impl Fn(f64) -> f64, den_roots: &[Root], window: &Window) -> Vec<Root> {
    let tol = window.coincidence_tol();
    sigma_roots(num, window)
        .into_iter()
        .filter(|r| den_roots.iter().all(|d| (d.x - r.x).abs() > tol))
        .collect()
}

/// Stability from the sign change of `H` across the root, mapped by region.
fn stability(
    z: &FilippovSystem,
    x: f64,
    grid: f64,
    region: SigmaPointClass,
    root: Root,
) -> PseudoKind {
    if !root.crossing {
        return PseudoKind::Degenerate;
    }
    let mut delta = 1e-3 * grid;
    let mut sides = None;
    for _ in 0..20 {
        let l = direction_function(z, x - delta).value;
        let r = direction_function(z, x + delta).value;
        if let (Some(l), Some(r)) = (l, r) {
            if l != 0.0 && r != 0.0 && l.signum() != r.signum() {
                sides = Some((l, r));
                break;
            }
        }
        delta *= 4.0;
        if delta > grid {
            break;
        }
    }
    let Some((l, _)) = sides else {
        return PseudoKind::Degenerate;
    };
    // H: + → - attracts the sliding flow, - → + repels it.
    let attracts = l > 0.0;
    match (region, attracts) {
        (SigmaPointClass::Sliding, true) => PseudoKind::SigmaAttractor,
        (SigmaPointClass::Sliding, false) => PseudoKind::SigmaSaddle,
        (_, true) => PseudoKind::SigmaSaddle,
        (_, false) => PseudoKind::SigmaRepeller,
    }
}

/// Counts `(n1, n2, v1, v2)` with
/// `n1`: pseudo-equilibria (including boundary-flagged ones),
/// `n2`: virtual pseudo-equilibria,
/// `v1`: zeros of `H` (numerator zeros where the denominator is nonzero),
/// `v2`: zeros of the denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountIdentity {
    pub n1: usize,
    pub n2: usize,
    pub v1: usize,
    pub v2: usize,
    pub holds: bool,
}

pub fn count_identity_check(z: &FilippovSystem, window: &Window) -> CountIdentity {
    let inventory = find_pseudo_equilibria(z, window);
    let n2 = inventory.iter().filter(|p| p.is_virtual()).count();
    let n1 = inventory.len() - n2;
    // Independent raw scans of H's numerator and denominator.
    let den_roots = sigma_roots(|x| direction_function(z, x).denominator, window);
    let v1 = h_zeros(|x| direction_function(z, x).numerator, &den_roots, window).len();
    let v2 = den_roots.len();
    CountIdentity {
        n1,
        n2,
        v1,
        v2,
        holds: n1 + n2 == v1 + v2,
    }
}

/// Maximal open intervals of constant region class over `[-r, r]`,
/// split at the zeros of `X.f` and `Y.f`.
pub fn region_layout(z: &FilippovSystem, window: &Window) -> Vec<(f64, f64, SigmaPointClass)> {
    let r = window.radius;
    let mut cuts = vec![-r, r];
    for g in [0usize, 1] {
        let roots = sigma_roots(
            |x| {
                let (a, b) = z.lie_pair(x);
                if g == 0 {
                    a
                } else {
                    b
                }
            },
            window,
        );
        cuts.extend(roots.iter().map(|r| r.x));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= window.coincidence_tol());
    let mut out: Vec<(f64, f64, SigmaPointClass)> = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        let class = region_at(z, 0.5 * (lo + hi));
        match out.last_mut() {
            Some(last) if last.2 == class => last.1 = hi,
            _ => out.push((lo, hi, class)),
        }
    }
    out
}
