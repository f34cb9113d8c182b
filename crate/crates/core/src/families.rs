//! Concrete fold–cusp systems: the invisible unfolding with its bump
//! correction, the visible unfolding, the sixteen standard forms, and the
//! two-parameter family used as a regression slice.
//!
//! The bump `B(x, β, μ)` is handled as a property contract (P1–P6 below)
//! rather than as a fixed formula. The default construction is a C¹
//! piecewise polynomial on the knots `{-√β, √β, 3√β+μ, 4√β}`:
//!
//! * on `[-√β, √β]` it vanishes, so `F` keeps its cubic shape and the
//!   invisible branch is untouched;
//! * on `[√β, 3√β+μ]` the potential rises from its minimum with curvature
//!   `√β` (half the left-hand curvature `2√β`) and reaches zero at
//!   `3√β+μ` with slope `β`;
//! * on `[3√β+μ, 4√β]` a cubic Hermite piece rejoins `x³/3 - βx + c0`
//!   with matching value and slope.
//!
//! All pieces are built in the scaled variable `u = x/√β`, where the
//! problem only depends on `μ/√β`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::planefield::{HorizontalLine, Profile, ShearField};
use crate::poly::Poly;
use crate::switching::TangencyKind;
use crate::system::{Family, FilippovSystem};

/// Curvature ratio `F''(√β⁺) / F''(√β⁻)` of the constructed bump.
pub const RIGHT_CURVATURE_RATIO: f64 = 0.5;
/// Scaled slope `F'(3√β+μ) / β` of the constructed bump.
const SLOPE_AT_RECOLLISION: f64 = 1.0;

/// Parameters `(λ, β, μ)` of the invisible unfolding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldCuspParams {
    pub lambda: f64,
    pub beta: f64,
    pub mu: f64,
}

impl FoldCuspParams {
    pub const LAMBDA0: f64 = 2.0;
    pub const BETA0: f64 = 2.0;

    pub fn new(lambda: f64, beta: f64, mu: f64) -> Self {
        Self { lambda, beta, mu }
    }

    pub fn sqrt_beta(&self) -> f64 {
        self.beta.max(0.0).sqrt()
    }

    /// Default `μ0 = 0.5·√β` used for the fixed-sign slices.
    pub fn default_mu0(beta: f64) -> f64 {
        0.5 * beta.max(0.0).sqrt()
    }

    /// Checks the parameter box. For `β > 0` the recollision point
    /// `3√β + μ` must lie in `(√β, 4√β)`, i.e. `μ ∈ (-2√β, √β)`.
    pub fn validate(&self) -> Result<()> {
        let Self { lambda, beta, mu } = *self;
        if !(lambda.is_finite() && beta.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidParameters("non-finite parameter".into()));
        }
        if lambda.abs() > Self::LAMBDA0 {
            return Err(Error::InvalidParameters(format!(
                "|lambda| = {} exceeds {}",
                lambda.abs(),
                Self::LAMBDA0
            )));
        }
        if beta.abs() > Self::BETA0 {
            return Err(Error::InvalidParameters(format!(
                "|beta| = {} exceeds {}",
                beta.abs(),
                Self::BETA0
            )));
        }
        if beta > 0.0 {
            let s = beta.sqrt();
            if !(mu > -2.0 * s && mu < s) {
                return Err(Error::InvalidParameters(format!(
                    "mu = {mu} puts 3*sqrt(beta)+mu outside (sqrt(beta), 4*sqrt(beta)) for beta = {beta}"
                )));
            }
        } else if mu.abs() > 1.0 {
            return Err(Error::InvalidParameters(format!("|mu| = {} exceeds 1", mu.abs())));
        }
        Ok(())
    }
}

/// Signs `(ρ1, ρ2, ρ3, ρ4)` of the standard form `((ρ1, ρ2 x), (ρ3, ρ4 x²))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StandardFormParams {
    pub rho: [i8; 4],
}

impl StandardFormParams {
    pub fn new(rho: [i8; 4]) -> Result<Self> {
        if rho.iter().any(|r| *r != 1 && *r != -1) {
            return Err(Error::InvalidParameters(format!(
                "standard form signs must be ±1, got {rho:?}"
            )));
        }
        Ok(Self { rho })
    }

    /// All sixteen sign combinations.
    pub fn all() -> Vec<Self> {
        (0..16u8)
            .map(|bits| {
                let sign = |k: u8| if bits & (1 << k) == 0 { 1 } else { -1 };
                Self {
                    rho: [sign(3), sign(2), sign(1), sign(0)],
                }
            })
            .collect()
    }
}

/// Cusp kind printed for the two named standard forms: `(1, -1, -1, -1)`
/// is labelled kind 1 and `(1, 1, 1, -1)` kind 2.
pub fn documented_cusp_kind(rho: StandardFormParams) -> Option<TangencyKind> {
    match rho.rho {
        [1, -1, -1, -1] => Some(TangencyKind::CuspKind1),
        [1, 1, 1, -1] => Some(TangencyKind::CuspKind2),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BumpSource {
    Constructed,
    PaperPrinted,
}

/// One polynomial piece on `[lo, hi]`, expressed in `x - lo`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BumpPiece {
    pub lo: f64,
    pub hi: f64,
    pub poly: Poly,
}

impl BumpPiece {
    fn deriv(&self, x: f64, k: usize) -> f64 {
        self.poly.eval_deriv(x - self.lo, k)
    }
}

/// Compactly supported correction `B(x)` for fixed `(β, μ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BumpFunction {
    pub beta: f64,
    pub mu: f64,
    pub source: BumpSource,
    pub pieces: Vec<BumpPiece>,
}

impl BumpFunction {
    pub fn zero(beta: f64, mu: f64, source: BumpSource) -> Self {
        Self {
            beta,
            mu,
            source,
            pieces: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Support `[-√β, 4√β]`, or `None` for the zero bump.
    pub fn support(&self) -> Option<(f64, f64)> {
        Some((self.pieces.first()?.lo, self.pieces.last()?.hi))
    }

    /// Breakpoints between pieces, including both support ends.
    pub fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.pieces.iter().map(|p| p.lo).collect();
        if let Some(last) = self.pieces.last() {
            k.push(last.hi);
        }
        k
    }

    fn piece_at(&self, x: f64) -> Option<&BumpPiece> {
        self.pieces.iter().find(|p| p.lo <= x && x <= p.hi)
    }

    /// k-th derivative of `B` at `x` (k = 0 is the value).
    pub fn deriv(&self, x: f64, k: usize) -> f64 {
        self.piece_at(x).map_or(0.0, |p| p.deriv(x, k))
    }

    pub fn value(&self, x: f64) -> f64 {
        self.deriv(x, 0)
    }

    /// One-sided limit of the k-th derivative at a knot.
    pub fn one_sided(&self, x: f64, k: usize, from_right: bool) -> f64 {
        let piece = if from_right {
            self.pieces.iter().find(|p| p.lo <= x && x < p.hi)
        } else {
            self.pieces.iter().rev().find(|p| p.lo < x && x <= p.hi)
        };
        piece.map_or(0.0, |p| p.deriv(x, k))
    }
}

/// `G0(u) = u³/3 - u - 2/3`, the cubic part of `F/β^{3/2}`.
fn scaled_cubic() -> Poly {
    Poly::new(vec![-2.0 / 3.0, -1.0, 0.0, 1.0 / 3.0])
}

/// Builds the default bump meeting P1–P6; the zero bump when `β ≤ 0`.
pub fn bump_construct(beta: f64, mu: f64) -> Result<BumpFunction> {
    if beta <= 0.0 {
        return Ok(BumpFunction::zero(beta, mu, BumpSource::Constructed));
    }
    let s = beta.sqrt();
    let m = mu / s;
    let cu = 3.0 + m;
    if !(cu > 1.0 && cu < 4.0) {
        return Err(Error::Domain {
            what: "mu/sqrt(beta)",
            value: m,
            domain: "(-2, 1)".into(),
        });
    }
    let g0 = scaled_cubic();
    let kappa = 2.0 * RIGHT_CURVATURE_RATIO;

    // Rising branch on [1, cu]: G(1 + h) = -4/3 + κ/2 h² + a h³ + b h⁴,
    // with G(cu) = 0 and G'(cu) = slope.
    let len = cu - 1.0;
    let (a, b) = solve2(
        [[len.powi(3), len.powi(4)], [3.0 * len * len, 4.0 * len.powi(3)]],
        [
            4.0 / 3.0 - 0.5 * kappa * len * len,
            SLOPE_AT_RECOLLISION - kappa * len,
        ],
    );
    let rising = Poly::new(vec![-4.0 / 3.0, 0.0, 0.5 * kappa, a, b]);

    // Rejoining branch on [cu, 4]: cubic Hermite from (0, slope) to
    // (G0(4), G0'(4)) = (50/3, 15).
    let lh = 4.0 - cu;
    let target = g0.eval(4.0);
    let target_slope = g0.eval_deriv(4.0, 1);
    let (c2, c3) = solve2(
        [[lh * lh, lh.powi(3)], [2.0 * lh, 3.0 * lh * lh]],
        [
            target - SLOPE_AT_RECOLLISION * lh,
            target_slope - SLOPE_AT_RECOLLISION,
        ],
    );
    let rejoin = Poly::new(vec![0.0, SLOPE_AT_RECOLLISION, c2, c3]);

    // B = β^{3/2}(G - G0) re-expressed in x - lo.
    let to_physical = |g: &Poly, u0: f64| -> Poly {
        let diff = g.sub(&g0.recentered(u0, 1.0));
        let scale = s.powi(3);
        Poly::new(
            diff.coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| c * scale / s.powi(k as i32))
                .collect(),
        )
    };
    let pieces = vec![
        BumpPiece {
            lo: -s,
            hi: s,
            poly: Poly::zero(),
        },
        BumpPiece {
            lo: s,
            hi: s * cu,
            poly: to_physical(&rising, 1.0),
        },
        BumpPiece {
            lo: s * cu,
            hi: 4.0 * s,
            poly: to_physical(&rejoin, cu),
        },
    ];
    let bump = BumpFunction {
        beta,
        mu,
        source: BumpSource::Constructed,
        pieces,
    };
    verify_construction(&bump)?;
    Ok(bump)
}

fn solve2(m: [[f64; 2]; 2], rhs: [f64; 2]) -> (f64, f64) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    (
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    )
}

fn verify_construction(bump: &BumpFunction) -> Result<()> {
    let s = bump.beta.sqrt();
    let n = 1024;
    for i in 1..n {
        let x = -s + 5.0 * s * i as f64 / n as f64;
        let fp = x * x - bump.beta + bump.deriv(x, 1);
        let ok = if x < s - 1e-12 * s {
            fp < 0.0
        } else if x > s + 1e-12 * s {
            fp > 0.0
        } else {
            true
        };
        if !ok {
            return Err(Error::BumpConstruction {
                property: "P3",
                abscissa: x,
            });
        }
    }
    for x in [-s, s] {
        for right in [false, true] {
            if bump.one_sided(x, 2, right).abs() >= 2.0 * s {
                return Err(Error::BumpConstruction {
                    property: "P5",
                    abscissa: x,
                });
            }
        }
    }
    if 2.0 * s + bump.one_sided(s, 2, true) >= 2.0 * s + bump.one_sided(s, 2, false) {
        return Err(Error::BumpConstruction {
            property: "P6",
            abscissa: s,
        });
    }
    Ok(())
}

/// Printed `B1(x, β)`, valid nominally on `[-√β, √β]`.
pub fn paper_b1(beta: f64) -> Poly {
    let s = beta.sqrt();
    Poly::new(vec![
        beta * (688.0 + 93.0 * beta),
        -4.0 * s * (176.0 + 15.0 * beta),
        208.0 + 3.0 * beta,
    ])
    .scaled(-3.0 / (128.0 * beta))
}

/// Printed `B2(x, β)`, valid nominally on `(√β, 4√β]`.
pub fn paper_b2(beta: f64) -> Poly {
    let s = beta.sqrt();
    let shift = Poly::new(vec![-4.0 * s, 1.0]);
    let cube = shift.mul(&shift).mul(&shift);
    let quad = Poly::new(vec![beta, 0.0, 1.0])
        .scaled(-16.0 + 9.0 * beta)
        .add(&Poly::new(vec![0.0, -2.0 * s * (16.0 + 15.0 * beta)]));
    cube.mul(&quad).scaled(-1.0 / (48.0 * beta))
}

/// Printed `f(β, μ)`, reading the two adjacent μ-products of the first
/// term as a single product.
pub fn paper_f(beta: f64, mu: f64) -> f64 {
    let s = beta.sqrt();
    mu / 48.0
        * (-8.0 * beta * (128.0 + 3.0 * beta) * mu * s * (256.0 + 63.0 * beta) * mu
            - (-64.0 + 45.0 * beta) * mu * mu
            - (80.0 + 3.0 * beta) / s * mu.powi(3)
            + (-16.0 + 9.0 * beta) / beta * mu.powi(4))
}

/// The printed piecewise formulas as a [`BumpFunction`].
pub fn bump_paper_function(beta: f64, mu: f64) -> BumpFunction {
    if beta <= 0.0 {
        return BumpFunction::zero(beta, mu, BumpSource::PaperPrinted);
    }
    let s = beta.sqrt();
    let f = Poly::constant(paper_f(beta, mu));
    BumpFunction {
        beta,
        mu,
        source: BumpSource::PaperPrinted,
        pieces: vec![
            BumpPiece {
                lo: -s,
                hi: s,
                poly: paper_b1(beta).add(&f).recentered(-s, 1.0),
            },
            BumpPiece {
                lo: s,
                hi: 4.0 * s,
                poly: paper_b2(beta).add(&f).recentered(s, 1.0),
            },
        ],
    }
}

/// Literal evaluation of the printed bump formulas at `x`.
pub fn bump_paper(beta: f64, mu: f64, x: f64) -> f64 {
    if beta <= 0.0 {
        return 0.0;
    }
    let s = beta.sqrt();
    if x < -s || x > 4.0 * s {
        0.0
    } else if x <= s {
        paper_b1(beta).eval(x) + paper_f(beta, mu)
    } else {
        paper_b2(beta).eval(x) + paper_f(beta, mu)
    }
}

/// `c0 = -2β√β/3` (zero when `β ≤ 0`).
pub fn c0(beta: f64) -> f64 {
    if beta > 0.0 {
        -2.0 * beta * beta.sqrt() / 3.0
    } else {
        0.0
    }
}

/// Potential `F(x) = x³/3 - βx + B(x) + c0` and its derivative. Orbits of
/// `Y` through `(x1, 0)` are the graphs `y = F(x) - F(x1)`.
pub fn potential_f(bump: &BumpFunction, x: f64) -> (f64, f64) {
    let beta = bump.beta;
    (
        x.powi(3) / 3.0 - beta * x + bump.value(x) + c0(beta),
        x * x - beta + bump.deriv(x, 1),
    )
}

/// `F''(x)`.
pub fn potential_f2(bump: &BumpFunction, x: f64) -> f64 {
    2.0 * x + bump.deriv(x, 2)
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub pass: bool,
    /// Largest violation measured for this property (0 when it holds).
    pub residual: f64,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BumpReport {
    pub source: BumpSource,
    pub beta: f64,
    pub mu: f64,
    pub properties: Vec<PropertyCheck>,
}

impl BumpReport {
    pub fn all_pass(&self) -> bool {
        self.properties.iter().all(|p| p.pass)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyCheck> {
        self.properties.iter().find(|p| p.name == name)
    }
}

/// Checks a bump against P1–P6 and reports measured residuals.
pub fn validate_bump(bump: &BumpFunction) -> BumpReport {
    let (beta, mu) = (bump.beta, bump.mu);
    let mut properties = Vec::new();
    if beta <= 0.0 {
        let probe = [-2.0, -0.5, 0.0, 0.5, 2.0];
        let res = probe.iter().map(|&x| bump.value(x).abs()).fold(0.0, f64::max);
        properties.push(PropertyCheck {
            name: "P1",
            pass: res == 0.0,
            residual: res,
            note: "beta <= 0 requires the zero bump".into(),
        });
        return BumpReport {
            source: bump.source,
            beta,
            mu,
            properties,
        };
    }
    let s = beta.sqrt();
    let c = 3.0 * s + mu;
    const GRID: usize = 1024;

    // P1: zero outside the support.
    let outside = [-3.0 * s, -1.5 * s, -s * (1.0 + 1e-9), 4.0 * s * (1.0 + 1e-9), 6.0 * s];
    let p1 = outside.iter().map(|&x| bump.value(x).abs()).fold(0.0, f64::max);
    properties.push(PropertyCheck {
        name: "P1",
        pass: p1 == 0.0,
        residual: p1,
        note: "max |B| sampled outside [-sqrt(beta), 4 sqrt(beta)]".into(),
    });

    // P2: C¹, with zero value and slope at both support ends.
    let mut jumps = Vec::new();
    let mut p2 = 0.0f64;
    let tol = 1e-9 * (1.0 + beta.powf(1.5));
    let mut knots = bump.knots();
    knots.dedup();
    for &x in &knots {
        let v = (bump.one_sided(x, 0, true) - bump.one_sided(x, 0, false)).abs();
        let d = (bump.one_sided(x, 1, true) - bump.one_sided(x, 1, false)).abs();
        p2 = p2.max(v).max(d);
        if v > tol || d > tol {
            jumps.push(format!("x = {x:.6}: |jump B| = {v:.6e}, |jump B'| = {d:.6e}"));
        }
    }
    properties.push(PropertyCheck {
        name: "P2",
        pass: p2 <= tol,
        residual: p2,
        note: if jumps.is_empty() {
            "continuous with continuous first derivative at every knot".into()
        } else {
            jumps.join("; ")
        },
    });

    // P3: single minimum of F at sqrt(beta).
    let mut p3 = bump.one_sided(s, 1, false).abs().max(bump.one_sided(s, 1, true).abs());
    let mut p3_where = None;
    for i in 1..GRID {
        let x = -s + 5.0 * s * i as f64 / GRID as f64;
        if (x - s).abs() < 1e-12 * s {
            continue;
        }
        let fp = x * x - beta + bump.deriv(x, 1);
        let viol = if x < s { fp.max(0.0) } else { (-fp).max(0.0) };
        if viol > 0.0 && p3_where.is_none() {
            p3_where = Some(x);
        }
        p3 = p3.max(viol);
    }
    properties.push(PropertyCheck {
        name: "P3",
        pass: p3 <= tol,
        residual: p3,
        note: match p3_where {
            None => "F' < 0 on (-s, s), F' > 0 on (s, 4s), B'(s) = 0".into(),
            Some(x) => format!("F' has the wrong sign at x = {x:.6}"),
        },
    });

    // P4: recollision at c.
    let p4 = potential_f(bump, c).0.abs();
    properties.push(PropertyCheck {
        name: "P4",
        pass: p4 < 1e-10,
        residual: p4,
        note: format!("|F(3 sqrt(beta) + mu)| at x = {c:.6}"),
    });

    // P5: |B''| < 2 sqrt(beta) on both sides of both folds.
    let mut p5 = f64::NEG_INFINITY;
    for x in [-s, s] {
        for right in [false, true] {
            p5 = p5.max(bump.one_sided(x, 2, right).abs() - 2.0 * s);
        }
    }
    properties.push(PropertyCheck {
        name: "P5",
        pass: p5 < 0.0,
        residual: p5.max(0.0),
        note: "max(|B''|) - 2 sqrt(beta) at the folds".into(),
    });

    // P6: F''(s+) < F''(s-).
    let right = 2.0 * s + bump.one_sided(s, 2, true);
    let left = 2.0 * s + bump.one_sided(s, 2, false);
    properties.push(PropertyCheck {
        name: "P6",
        pass: right < left && right > 0.0,
        residual: (right - left).max(0.0),
        note: format!("F''(s+) = {right:.6e}, F''(s-) = {left:.6e}"),
    });

    BumpReport {
        source: bump.source,
        beta,
        mu,
        properties,
    }
}

/// Vertical component `-x² + β - B'(x)` of `Y` in the invisible unfolding.
#[derive(Debug, Clone)]
struct BumpedParabola {
    bump: Arc<BumpFunction>,
}

impl Profile for BumpedParabola {
    fn value(&self, x: f64) -> f64 {
        -x * x + self.bump.beta - self.bump.deriv(x, 1)
    }
    fn d1(&self, x: f64) -> f64 {
        -2.0 * x - self.bump.deriv(x, 2)
    }
    fn d2(&self, x: f64) -> f64 {
        -2.0 - self.bump.deriv(x, 3)
    }
}

/// `X_λ = (1, λ - x)`, `Y = (-1, -x² + β - B'(x))`.
pub fn make_invisible_family(params: FoldCuspParams, bump: Arc<BumpFunction>) -> FilippovSystem {
    let x = ShearField::polynomial(1.0, Poly::new(vec![params.lambda, -1.0]));
    let y = ShearField::new(-1.0, Arc::new(BumpedParabola { bump: bump.clone() }));
    FilippovSystem::new(
        Arc::new(x),
        Arc::new(y),
        Arc::new(HorizontalLine),
        Family::Invisible { params, bump },
    )
}

/// Invisible unfolding with the constructed bump.
pub fn invisible_family(params: FoldCuspParams) -> Result<FilippovSystem> {
    params.validate()?;
    let bump = bump_construct(params.beta, params.mu)?;
    Ok(make_invisible_family(params, Arc::new(bump)))
}

/// `X_λ = (1, x - λ)`, `Y = (1, -x² + β)`.
pub fn make_visible_family(lambda: f64, beta: f64) -> FilippovSystem {
    let x = ShearField::polynomial(1.0, Poly::new(vec![-lambda, 1.0]));
    let y = ShearField::polynomial(1.0, Poly::new(vec![beta, 0.0, -1.0]));
    FilippovSystem::new(
        Arc::new(x),
        Arc::new(y),
        Arc::new(HorizontalLine),
        Family::Visible { lambda, beta },
    )
}

/// `X = (ρ1, ρ2 x)`, `Y = (ρ3, ρ4 x²)`.
pub fn standard_form(rho: StandardFormParams) -> FilippovSystem {
    let [r1, r2, r3, r4] = rho.rho.map(f64::from);
    let x = ShearField::polynomial(r1, Poly::new(vec![0.0, r2]));
    let y = ShearField::polynomial(r3, Poly::new(vec![0.0, 0.0, r4]));
    FilippovSystem::new(
        Arc::new(x),
        Arc::new(y),
        Arc::new(HorizontalLine),
        Family::Standard(rho),
    )
}

/// Two-parameter invisible fold–cusp family `X = (1, x - μ)`,
/// `Y = (-1, -x² + ε)`.
pub fn two_parameter_family(mu: f64, eps: f64) -> FilippovSystem {
    let x = ShearField::polynomial(1.0, Poly::new(vec![-mu, 1.0]));
    let y = ShearField::polynomial(-1.0, Poly::new(vec![eps, 0.0, -1.0]));
    FilippovSystem::new(
        Arc::new(x),
        Arc::new(y),
        Arc::new(HorizontalLine),
        Family::TwoParameter { mu, eps },
    )
}

/// Point of the slice `β = μ²`, `μ ≤ 0` of the invisible unfolding.
pub fn gst_slice(lambda: f64, mu: f64) -> Result<FoldCuspParams> {
    if mu > 0.0 {
        return Err(Error::Domain {
            what: "mu",
            value: mu,
            domain: "(-inf, 0]".into(),
        });
    }
    let p = FoldCuspParams::new(lambda, mu * mu, mu);
    if mu < 0.0 {
        p.validate()?;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planefield::{lie_derivatives, Point2};

    #[test]
    fn zero_bump_for_nonpositive_beta() {
        let b = bump_construct(-0.5, 0.1).unwrap();
        assert!(b.is_zero());
        assert_eq!(b.value(0.3), 0.0);
        assert!(validate_bump(&b).all_pass());
    }

    #[test]
    fn potential_zeros_at_both_ends_of_the_tangent_orbit() {
        let b = bump_construct(1.0, 0.0).unwrap();
        assert!(potential_f(&b, -1.0).0.abs() < 1e-12);
        assert!(potential_f(&b, 3.0).0.abs() < 1e-10);
        // B(3) = -16/3
        assert!((b.value(3.0) + 16.0 / 3.0).abs() < 1e-10);
        let (fmin, dmin) = potential_f(&b, 1.0);
        assert!(fmin < 0.0 && dmin.abs() < 1e-12);
    }

    #[test]
    fn constructed_bump_satisfies_contract_on_small_beta() {
        for mu in [-0.05, 0.05] {
            let b = bump_construct(0.04, mu).unwrap();
            let r = validate_bump(&b);
            assert!(r.all_pass(), "{r:?}");
            assert!(r.get("P4").unwrap().residual < 1e-10);
        }
    }

    #[test]
    fn paper_formula_values() {
        assert!((paper_b1(1.0).eval(1.0) + 5.34375).abs() < 1e-12);
        assert!((paper_b2(1.0).eval(1.0) + 42.75).abs() < 1e-12);
        assert!(paper_b2(0.7).eval(4.0 * 0.7f64.sqrt()).abs() < 1e-12);
        assert_eq!(paper_f(1.0, 0.0), 0.0);
        let pb = bump_paper_function(1.0, 0.0);
        assert!((pb.value(1.0) - bump_paper(1.0, 0.0, 1.0)).abs() < 1e-12);
        assert!((pb.value(2.0) - bump_paper(1.0, 0.0, 2.0)).abs() < 1e-10);
        let r = validate_bump(&pb);
        assert!(!r.get("P2").unwrap().pass);
    }

    #[test]
    fn standard_form_signs_are_validated() {
        assert!(StandardFormParams::new([1, 0, 1, 1]).is_err());
        let all = StandardFormParams::all();
        assert_eq!(all.len(), 16);
        assert!(all.contains(&StandardFormParams { rho: [1, -1, -1, -1] }));
    }

    #[test]
    fn organizing_center_has_fold_and_cusp_at_origin() {
        let z = invisible_family(FoldCuspParams::new(0.0, 0.0, 0.0)).unwrap();
        let o = Point2::ZERO;
        let lx = lie_derivatives(z.x.as_ref(), z.f.as_ref(), o);
        let ly = lie_derivatives(z.y.as_ref(), z.f.as_ref(), o);
        assert_eq!(lx[0], 0.0);
        assert!(lx[1] != 0.0);
        assert_eq!(ly[0], 0.0);
        assert_eq!(ly[1], 0.0);
        assert!(ly[2] != 0.0);
        assert_eq!(z.y.eval(Point2::new(0.5, 0.0)).x, -1.0);
    }

    #[test]
    fn parameter_box() {
        assert!(FoldCuspParams::new(2.5, 0.0, 0.0).validate().is_err());
        assert!(FoldCuspParams::new(0.0, 1.0, 1.0).validate().is_err());
        assert!(FoldCuspParams::new(0.0, 1.0, -1.0).validate().is_ok());
        assert!(gst_slice(0.1, 0.2).is_err());
        let p = gst_slice(0.1, -0.2).unwrap();
        assert!((p.beta - 0.04).abs() < 1e-15);
    }
}
