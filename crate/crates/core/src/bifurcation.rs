//! Case classification of the fold–cusp unfoldings and bifurcation
//! diagrams over `(λ, β)` slices.
//!
//! Boundaries come from geometric coincidences — `d` meeting `a`, `0`, `b`
//! or `c`; the landing points `ρ_X(a)`, `ρ_X(b)` meeting `c`; the collision
//! `L1` of the two kind-I cycles — never from printed inequalities. The
//! label found by locating `λ` among them is then checked against the cycle
//! census the case requires.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::families::{bump_construct, make_invisible_family, make_visible_family, FoldCuspParams};
use crate::planefield::Window;
use crate::retmaps::{
    detect_canard_cycles, CycleKind, CycleStability, CycleSummary, InvisibleMaps, SigmaProfile,
};
use crate::switching::{
    find_pseudo_equilibria, find_tangencies, region_layout, PseudoEquilibrium, SigmaPointClass,
    Tangency,
};
use crate::system::{Family, FilippovSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyTag {
    /// `X = (1, λ − x)`, `Y = (−1, −x² + β − B'(x))`.
    Invisible,
    /// `X = (1, x − λ)`, `Y = (1, −x² + β)`.
    Visible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ParamSign {
    Negative,
    Zero,
    Positive,
}

impl ParamSign {
    pub fn of(v: f64, tol: f64) -> Self {
        if v.abs() <= tol {
            ParamSign::Zero
        } else if v < 0.0 {
            ParamSign::Negative
        } else {
            ParamSign::Positive
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistinguishedPoint {
    pub name: &'static str,
    pub x: f64,
}

/// `λ`-values where the invisible unfolding changes for `β > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Boundaries {
    /// `ρ_X(a) = c`.
    pub lambda_loop: f64,
    /// `ρ_X(b) = c`.
    pub lambda_bc: f64,
    pub l1: f64,
    /// `d = c`.
    pub c: f64,
}

/// Topological fingerprint of a parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct SigmaSignature {
    pub family: FamilyTag,
    pub lambda: f64,
    pub beta: f64,
    pub mu: f64,
    pub beta_sign: ParamSign,
    /// `a`, `b`, `c`, `d` and the origin, as present; sorted.
    pub points: Vec<DistinguishedPoint>,
    /// Pairs of `points` closer than the coincidence tolerance.
    pub coincidences: Vec<(&'static str, &'static str)>,
    /// `ρ_X(a) = 2λ + √β` (invisible family) or the backward landing
    /// `−2√β` of the tangent `Y`-orbit through `b` (visible family).
    pub landing_a: Option<f64>,
    /// `ρ_X(b) = 2λ − √β` (invisible family).
    pub landing_b: Option<f64>,
    pub boundaries: Option<Boundaries>,
    pub tangencies: Vec<Tangency>,
    pub layout: Vec<(f64, f64, SigmaPointClass)>,
    pub pseudo: Vec<PseudoEquilibrium>,
    pub cycles: Vec<CycleSummary>,
    /// `d = b`.
    pub two_fold: bool,
    /// `ρ_X(a) = c`.
    pub loop_a_c: bool,
    /// `ρ_X(b) = c`.
    pub loop_b_c: bool,
    pub d_eq_c: bool,
    pub d_eq_a: bool,
    pub tolerance: f64,
}

impl SigmaSignature {
    pub fn non_virtual_pseudo(&self) -> usize {
        self.pseudo.iter().filter(|p| !p.is_virtual()).count()
    }

    /// Region word, tangency kinds, non-virtual pseudo-equilibrium kinds
    /// and cycle census: equal keys are taken as equal phase portraits.
    pub fn topological_key(&self) -> String {
        let regions: Vec<&str> = self.layout.iter().map(|r| r.2.short()).collect();
        let tangencies: Vec<String> =
            self.tangencies.iter().map(|t| format!("{:?}{:?}", t.owner, t.kind)).collect();
        let pseudo: Vec<String> = self
            .pseudo
            .iter()
            .filter(|p| !p.is_virtual())
            .map(|p| format!("{:?}", p.kind))
            .collect();
        let cycles: Vec<String> = self
            .cycles
            .iter()
            .map(|c| format!("{:?}{:?}{:?}", c.kind, c.stability, c.hyperbolic))
            .collect();
        format!(
            "{}|{}|{}|{}",
            regions.join(","),
            tangencies.join(","),
            pseudo.join(","),
            cycles.join(",")
        )
    }
}

/// Cached `σ`-profile and `L1` for one `(β, μ)`; valid for every `λ`.
#[derive(Debug, Clone)]
pub struct ColumnCache {
    pub beta: f64,
    pub mu: f64,
    pub maps: InvisibleMaps,
    pub profile: SigmaProfile,
}

impl ColumnCache {
    pub fn new(beta: f64, mu: f64) -> Result<Self> {
        let maps = InvisibleMaps::new(FoldCuspParams::new(0.0, beta, mu))?;
        let profile = maps.sigma_profile()?;
        Ok(Self {
            beta,
            mu,
            maps,
            profile,
        })
    }

    pub fn system(&self, lambda: f64) -> FilippovSystem {
        make_invisible_family(
            FoldCuspParams::new(lambda, self.beta, self.mu),
            self.maps.bump.clone(),
        )
    }
}

/// Signature of `z` in its default window.
pub fn signature(z: &FilippovSystem) -> Result<SigmaSignature> {
    signature_with(z, &z.default_window(), None)
}

/// Signature of `z`; for the invisible family with `β > 0` a matching
/// column cache avoids recomputing the `σ`-profile.
pub fn signature_with(
    z: &FilippovSystem,
    window: &Window,
    cache: Option<&ColumnCache>,
) -> Result<SigmaSignature> {
    let tol = window.coincidence_tol();
    let (family, lambda, beta, mu) = match &z.family {
        Family::Invisible { params, .. } => {
            (FamilyTag::Invisible, params.lambda, params.beta, params.mu)
        }
        Family::Visible { lambda, beta } => (FamilyTag::Visible, *lambda, *beta, 0.0),
        _ => {
            return Err(Error::InvalidParameters(
                "signatures are defined for the invisible and visible families".into(),
            ))
        }
    };
    let beta_sign = ParamSign::of(beta, tol);
    let s = beta.max(0.0).sqrt();
    let mut points = vec![
        DistinguishedPoint { name: "d", x: lambda },
        DistinguishedPoint { name: "0", x: 0.0 },
    ];
    let mut landing_a = None;
    let mut landing_b = None;
    let mut boundaries = None;
    let mut cycles = Vec::new();
    if beta_sign == ParamSign::Positive {
        points.push(DistinguishedPoint { name: "a", x: -s });
        points.push(DistinguishedPoint { name: "b", x: s });
        match family {
            FamilyTag::Invisible => {
                let owned;
                let col = match cache {
                    Some(c) if c.beta == beta && c.mu == mu => c,
                    _ => {
                        owned = ColumnCache::new(beta, mu)?;
                        &owned
                    }
                };
                let maps = col.maps.with_lambda(lambda);
                points.push(DistinguishedPoint { name: "c", x: maps.c });
                landing_a = Some(2.0 * lambda + s);
                landing_b = Some(2.0 * lambda - s);
                boundaries = Some(Boundaries {
                    lambda_loop: maps.lambda_loop(),
                    lambda_bc: maps.lambda_bc(),
                    l1: col.profile.l1,
                    c: maps.c,
                });
                cycles = maps.closed_form_census(&col.profile, window);
            }
            FamilyTag::Visible => {
                // −x³/3 + βx − 2β√β/3 = −(x − √β)²(x + 2√β)/3.
                landing_a = Some(-2.0 * s);
            }
        }
    }
    if cycles.is_empty() && boundaries.is_none() {
        cycles = detect_canard_cycles(z, window)?
            .iter()
            .map(|c| c.summary())
            .collect();
    }
    points.sort_by(|p, q| p.x.total_cmp(&q.x).then(p.name.cmp(q.name)));
    let mut coincidences = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            if (p.x - q.x).abs() <= tol {
                coincidences.push((p.name, q.name));
            }
        }
    }
    let near = |u: Option<f64>, v: f64| u.is_some_and(|u| (u - v).abs() <= tol);
    let c = boundaries.map(|b| b.c);
    let positive = beta_sign == ParamSign::Positive;
    Ok(SigmaSignature {
        family,
        lambda,
        beta,
        mu,
        beta_sign,
        coincidences,
        landing_a,
        landing_b,
        boundaries,
        tangencies: find_tangencies(z, window),
        layout: region_layout(z, window),
        pseudo: find_pseudo_equilibria(z, window),
        cycles,
        two_fold: positive && (lambda - s).abs() <= tol,
        loop_a_c: c.is_some_and(|c| near(landing_a, c)),
        loop_b_c: c.is_some_and(|c| near(landing_b, c)),
        d_eq_c: c.is_some_and(|c| (lambda - c).abs() <= tol),
        d_eq_a: positive && (lambda + s).abs() <= tol,
        points,
        tolerance: tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TheoremTag {
    /// `μ = 0` slice of the invisible unfolding.
    T1,
    /// `μ < 0`: the loop boundary falls left of `λ = √β`.
    T2,
    /// `μ > 0`: the loop boundary falls right of `λ = √β`.
    T3,
    /// Visible family.
    TB,
}

impl TheoremTag {
    pub fn suffix(self) -> &'static str {
        match self {
            TheoremTag::T1 => "1",
            TheoremTag::T2 => "2",
            TheoremTag::T3 => "3",
            TheoremTag::TB => "B",
        }
    }

    pub fn case_count(self) -> u8 {
        match self {
            TheoremTag::T1 => 17,
            TheoremTag::T2 | TheoremTag::T3 => 19,
            TheoremTag::TB => 11,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CaseLabel {
    pub tag: TheoremTag,
    pub index: u8,
}

impl CaseLabel {
    pub fn new(tag: TheoremTag, index: u8) -> Result<Self> {
        if index == 0 || index > tag.case_count() {
            return Err(Error::InvalidParameters(format!(
                "case {index} does not exist for {tag:?}"
            )));
        }
        Ok(Self { tag, index })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameters(format!("bad case label {s:?}"));
        let (i, t) = s.split_once('_').ok_or_else(bad)?;
        let tag = match t {
            "1" => TheoremTag::T1,
            "2" => TheoremTag::T2,
            "3" => TheoremTag::T3,
            "B" => TheoremTag::TB,
            _ => return Err(bad()),
        };
        Self::new(tag, i.parse().map_err(|_| bad())?)
    }

    pub fn all() -> Vec<CaseLabel> {
        [TheoremTag::T1, TheoremTag::T2, TheoremTag::T3, TheoremTag::TB]
            .into_iter()
            .flat_map(|t| (1..=t.case_count()).map(move |i| CaseLabel { tag: t, index: i }))
            .collect()
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.index, self.tag.suffix())
    }
}

impl Serialize for CaseLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Phase-portrait class: 23 for the invisible unfolding, 11 for the
/// visible family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EquivClass {
    A(u8),
    B(u8),
}

impl fmt::Display for EquivClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivClass::A(i) => write!(f, "A{i}"),
            EquivClass::B(i) => write!(f, "B{i}"),
        }
    }
}

impl Serialize for EquivClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Static case → class table. Classes `A1..A17` are represented by
/// `1_1..17_1`, `A18..A20` by `10_2..12_2`, `A21..A23` by `10_3..12_3`.
/// For `k ≥ 13` the `μ ≠ 0` cases shift by two onto `(k−2)_1`.
pub fn equivalence_class(label: CaseLabel) -> EquivClass {
    let k = label.index;
    match label.tag {
        TheoremTag::TB => EquivClass::B(k),
        TheoremTag::T1 => EquivClass::A(k),
        TheoremTag::T2 | TheoremTag::T3 => {
            let base = if label.tag == TheoremTag::T2 { 18 } else { 21 };
            match k {
                1..=9 => EquivClass::A(k),
                10..=12 => EquivClass::A(base + k - 10),
                _ => EquivClass::A(k - 2),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Classification {
    Case { label: CaseLabel, class: EquivClass },
    /// Within tolerance of several cases, or inconsistent with all.
    BoundaryUnresolved { reason: String },
}

impl Classification {
    pub fn label(&self) -> Option<CaseLabel> {
        match self {
            Classification::Case { label, .. } => Some(*label),
            Classification::BoundaryUnresolved { .. } => None,
        }
    }
}

/// Position of `λ` among increasing boundaries: `Ok(2i)` strictly left of
/// bound `i`, `Ok(2i+1)` at bound `i`, `Ok(2n)` right of all.
fn locate(lambda: f64, bounds: &[f64], tol: f64) -> std::result::Result<usize, String> {
    if bounds.windows(2).any(|w| w[1] - w[0] <= 2.0 * tol) {
        return Err(format!("boundaries not separated: {bounds:?}"));
    }
    for (i, &b) in bounds.iter().enumerate() {
        if (lambda - b).abs() <= tol {
            return Ok(2 * i + 1);
        }
        if lambda < b {
            return Ok(2 * i);
        }
    }
    Ok(2 * bounds.len())
}

#[derive(Debug, Clone, PartialEq)]
struct ExpectedCensus {
    /// Stabilities of kind-I cycles in increasing anchor order.
    kind_one: Vec<CycleStability>,
    /// `Some(hyperbolic)` when a repelling kind-III cycle is required.
    kind_three: Option<bool>,
}

fn expected_census(label: CaseLabel) -> ExpectedCensus {
    use CycleStability::*;
    let none = ExpectedCensus {
        kind_one: vec![],
        kind_three: None,
    };
    let iii = |h: bool| ExpectedCensus {
        kind_one: vec![],
        kind_three: Some(h),
    };
    let one = |v: Vec<CycleStability>, k3: Option<bool>| ExpectedCensus {
        kind_one: v,
        kind_three: k3,
    };
    match (label.tag, label.index) {
        (TheoremTag::TB, _) => none,
        (_, 1..=5) => none,
        (_, 6) => iii(false),
        (_, 7 | 8) => iii(true),
        (TheoremTag::T1, 9) => iii(true),
        (TheoremTag::T1, 10) => iii(false),
        (TheoremTag::T1, 11) => one(vec![Attracting, Repelling], None),
        (TheoremTag::T1, 12) => one(vec![TwoSided], None),
        (TheoremTag::T1, _) => none,
        (TheoremTag::T2, 9) => iii(true),
        (TheoremTag::T2, 10) => iii(false),
        (TheoremTag::T2, 11 | 12) => one(vec![Repelling], None),
        (TheoremTag::T3, 9 | 10) => iii(true),
        (TheoremTag::T3, 11) => one(vec![Attracting], Some(true)),
        (TheoremTag::T3, 12) => one(vec![Attracting], Some(false)),
        (_, 13) => one(vec![Attracting, Repelling], None),
        (_, 14) => one(vec![TwoSided], None),
        _ => none,
    }
}

fn census_matches(expected: &ExpectedCensus, cycles: &[CycleSummary]) -> bool {
    let mut ones: Vec<&CycleSummary> = cycles.iter().filter(|c| c.kind == CycleKind::I).collect();
    ones.sort_by(|a, b| a.anchor.total_cmp(&b.anchor));
    let threes: Vec<&CycleSummary> = cycles.iter().filter(|c| c.kind == CycleKind::III).collect();
    let ones_ok = ones.len() == expected.kind_one.len()
        && ones.iter().zip(&expected.kind_one).all(|(c, s)| c.stability == *s);
    let threes_ok = match expected.kind_three {
        None => threes.is_empty(),
        Some(h) => {
            threes.len() == 1
                && threes[0].stability == CycleStability::Repelling
                && threes[0].hyperbolic == Some(h)
        }
    };
    ones_ok && threes_ok && cycles.iter().all(|c| c.kind != CycleKind::II)
}

/// Case-list tag for a point of the invisible unfolding; `slice` overrides
/// the sign of `μ` (scaled slices have `μ = 0` for `β ≤ 0`).
pub fn theorem_tag(family: FamilyTag, mu: f64, tol: f64, slice: Option<ParamSign>) -> TheoremTag {
    if family == FamilyTag::Visible {
        return TheoremTag::TB;
    }
    match slice.unwrap_or(ParamSign::of(mu, tol)) {
        ParamSign::Zero => TheoremTag::T1,
        ParamSign::Negative => TheoremTag::T2,
        ParamSign::Positive => TheoremTag::T3,
    }
}

/// Case label of a signature.
pub fn classify_signature(sig: &SigmaSignature, slice: Option<ParamSign>) -> Classification {
    let tol = sig.tolerance;
    let tag = theorem_tag(sig.family, sig.mu, tol, slice);
    let unresolved = |reason: String| Classification::BoundaryUnresolved { reason };
    let index = match sig.beta_sign {
        ParamSign::Negative => 1,
        ParamSign::Zero => match ParamSign::of(sig.lambda, tol) {
            ParamSign::Negative => 2,
            ParamSign::Zero => 3,
            ParamSign::Positive => 4,
        },
        ParamSign::Positive => {
            let s = sig.beta.sqrt();
            let bounds = match (tag, sig.boundaries) {
                (TheoremTag::TB, _) => vec![-2.0 * s, -s, s],
                (TheoremTag::T1, Some(b)) => vec![-s, 0.0, s, b.l1, b.lambda_bc, b.c],
                (TheoremTag::T2, Some(b)) => vec![-s, 0.0, b.lambda_loop, s, b.l1, b.lambda_bc, b.c],
                (TheoremTag::T3, Some(b)) => vec![-s, 0.0, s, b.lambda_loop, b.l1, b.lambda_bc, b.c],
                _ => return unresolved("missing boundary data".into()),
            };
            match locate(sig.lambda, &bounds, tol) {
                Ok(p) => 5 + p as u8,
                Err(e) => return unresolved(e),
            }
        }
    };
    let label = CaseLabel { tag, index };
    if !census_matches(&expected_census(label), &sig.cycles) {
        return unresolved(format!(
            "cycle census {:?} does not match case {label}",
            sig.cycles
                .iter()
                .map(|c| (c.kind, c.stability, c.hyperbolic))
                .collect::<Vec<_>>()
        ));
    }
    Classification::Case {
        label,
        class: equivalence_class(label),
    }
}

/// Builds the system for a family and parameters.
pub fn build_system(family: FamilyTag, params: FoldCuspParams) -> Result<FilippovSystem> {
    match family {
        FamilyTag::Invisible => {
            params.validate()?;
            let bump = bump_construct(params.beta, params.mu)?;
            Ok(make_invisible_family(params, Arc::new(bump)))
        }
        FamilyTag::Visible => Ok(make_visible_family(params.lambda, params.beta)),
    }
}

/// Case label of a parameter point.
pub fn classify_case(
    params: FoldCuspParams,
    family: FamilyTag,
    slice: Option<ParamSign>,
) -> Result<(Classification, SigmaSignature)> {
    let z = build_system(family, params)?;
    let sig = signature(&z)?;
    Ok((classify_signature(&sig, slice), sig))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L1Solution {
    pub lambda: f64,
    /// Where the two fixed points merge.
    pub x: f64,
    /// `|ψ(x) − x|`.
    pub residual_fixed: f64,
    /// `|ψ'(x) − 1|`.
    pub residual_slope: f64,
}

/// The saddle-node value `L1(β, μ)` of the kind-I cycles.
#[allow(non_snake_case)]
pub fn find_L1(beta: f64, mu: f64) -> Result<L1Solution> {
    let maps = InvisibleMaps::new(FoldCuspParams::new(0.0, beta, mu))?;
    let (x, lambda) = maps.sigma_max()?;
    let m = maps.with_lambda(lambda);
    Ok(L1Solution {
        lambda,
        x,
        residual_fixed: (m.psi(x)? - x).abs(),
        residual_slope: (m.psi_d1(x)? - 1.0).abs(),
    })
}

/// How `μ` varies over a slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuSpec {
    Fixed(f64),
    /// `μ = k·√max(β, 0)`.
    Scaled(f64),
}

impl MuSpec {
    pub fn at(self, beta: f64) -> f64 {
        match self {
            MuSpec::Fixed(m) => m,
            MuSpec::Scaled(k) => k * beta.max(0.0).sqrt(),
        }
    }

    pub fn sign(self) -> ParamSign {
        let v = match self {
            MuSpec::Fixed(m) | MuSpec::Scaled(m) => m,
        };
        ParamSign::of(v, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub family: FamilyTag,
    pub lambda_range: (f64, f64),
    pub beta_range: (f64, f64),
    pub n_lambda: usize,
    pub n_beta: usize,
    pub mu: MuSpec,
}

impl GridSpec {
    pub fn new(family: FamilyTag, n: usize, mu: MuSpec) -> Self {
        Self {
            family,
            lambda_range: (-2.0, 2.0),
            beta_range: (-1.0, 1.0),
            n_lambda: n,
            n_beta: n,
            mu,
        }
    }

    fn validate(&self) -> Result<()> {
        let (l0, l1) = self.lambda_range;
        let (b0, b1) = self.beta_range;
        let inside = |v: f64, m: f64| v.is_finite() && v.abs() <= m;
        if !(l0 < l1 && b0 < b1)
            || !inside(l0, FoldCuspParams::LAMBDA0)
            || !inside(l1, FoldCuspParams::LAMBDA0)
            || !inside(b0, FoldCuspParams::BETA0)
            || !inside(b1, FoldCuspParams::BETA0)
            || self.n_lambda == 0
            || self.n_beta == 0
        {
            return Err(Error::InvalidParameters(format!("bad grid {self:?}")));
        }
        Ok(())
    }

    fn row(&self, j: usize) -> (f64, f64) {
        let (b0, b1) = self.beta_range;
        let h = (b1 - b0) / self.n_beta as f64;
        (b0 + h * j as f64, b0 + h * (j + 1) as f64)
    }

    fn col(&self, i: usize) -> (f64, f64) {
        let (l0, l1) = self.lambda_range;
        let h = (l1 - l0) / self.n_lambda as f64;
        (l0 + h * i as f64, l0 + h * (i + 1) as f64)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
    pub lambda: f64,
    pub beta: f64,
    pub mu: f64,
    pub label: Option<CaseLabel>,
    pub class: Option<EquivClass>,
    pub n_pseudo: usize,
    pub n_cycles: usize,
    /// Snapped onto a boundary curve.
    pub boundary_flag: bool,
    /// Why the cell could not be classified.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryCurve {
    pub name: &'static str,
    /// `(λ, β)` vertices, one per grid row.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BifDiagram {
    pub spec: GridSpec,
    /// Row-major: `cells[j * n_lambda + i]`.
    pub cells: Vec<Cell>,
    pub label_counts: BTreeMap<String, usize>,
    pub curves: Vec<BoundaryCurve>,
    pub failures: usize,
}

impl BifDiagram {
    pub fn distinct_labels(&self) -> Vec<CaseLabel> {
        let mut v: Vec<CaseLabel> = self.cells.iter().filter_map(|c| c.label).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn distinct_classes(&self) -> Vec<EquivClass> {
        let mut v: Vec<EquivClass> = self.cells.iter().filter_map(|c| c.class).collect();
        v.sort();
        v.dedup();
        v
    }
}

/// Boundary curves `λ = h(β)` of a slice at one `β > 0`.
fn curves_at(family: FamilyTag, beta: f64, cache: Option<&ColumnCache>) -> Vec<(&'static str, f64)> {
    let s = beta.sqrt();
    match (family, cache) {
        (FamilyTag::Visible, _) => vec![("-2sqrt(beta)", -2.0 * s), ("-sqrt(beta)", -s), ("sqrt(beta)", s)],
        (FamilyTag::Invisible, Some(col)) => {
            let m = &col.maps;
            vec![
                ("-sqrt(beta)", -s),
                ("lambda=0", 0.0),
                ("sqrt(beta)", s),
                ("lambda_loop", m.lambda_loop()),
                ("L1", col.profile.l1),
                ("lambda_bc", m.lambda_bc()),
                ("c", m.c),
            ]
        }
        _ => vec![],
    }
}

struct Row {
    beta: f64,
    contains_beta_zero: bool,
    cache: Option<std::result::Result<ColumnCache, String>>,
}

/// Classifies every cell of the grid. Cells whose row or column is crossed
/// by a boundary curve are moved onto it (one cell per row and curve, the
/// `β = 0` row entirely, the origin cell to `(0, 0)`) and flagged.
pub fn sweep(spec: &GridSpec, exec: Execution) -> Result<BifDiagram> {
    spec.validate()?;
    let slice = match spec.family {
        FamilyTag::Invisible => Some(spec.mu.sign()),
        FamilyTag::Visible => None,
    };
    let row_ids: Vec<usize> = (0..spec.n_beta).collect();
    let rows: Vec<Row> = map_indexed(exec, &row_ids, |_, &j| {
        let (lo, hi) = spec.row(j);
        let beta = 0.5 * (lo + hi);
        let contains_beta_zero = lo <= 0.0 && 0.0 < hi;
        let cache = (spec.family == FamilyTag::Invisible && beta > 0.0 && !contains_beta_zero)
            .then(|| ColumnCache::new(beta, spec.mu.at(beta)).map_err(|e| e.to_string()));
        Row {
            beta,
            contains_beta_zero,
            cache,
        }
    });

    let ids: Vec<(usize, usize)> = (0..spec.n_beta)
        .flat_map(|j| (0..spec.n_lambda).map(move |i| (i, j)))
        .collect();
    let cells: Vec<Cell> = map_indexed(exec, &ids, |_, &(i, j)| {
        let row = &rows[j];
        let (llo, lhi) = spec.col(i);
        let mut lambda = 0.5 * (llo + lhi);
        let mut beta = row.beta;
        let mut boundary_flag = false;
        if row.contains_beta_zero {
            beta = 0.0;
            boundary_flag = true;
            if llo <= 0.0 && 0.0 < lhi {
                lambda = 0.0;
            }
        } else if beta > 0.0 {
            let cache = row.cache.as_ref().and_then(|c| c.as_ref().ok());
            let best = curves_at(spec.family, beta, cache)
                .into_iter()
                .filter(|&(_, v)| llo <= v && v < lhi)
                .min_by(|a, b| (a.1 - lambda).abs().total_cmp(&(b.1 - lambda).abs()));
            if let Some((_, v)) = best {
                lambda = v;
                boundary_flag = true;
            }
        }
        let mu = spec.mu.at(beta);
        let mut cell = Cell {
            i,
            j,
            lambda,
            beta,
            mu,
            label: None,
            class: None,
            n_pseudo: 0,
            n_cycles: 0,
            boundary_flag,
            failure: None,
        };
        let result = (|| -> Result<(Classification, SigmaSignature)> {
            let params = FoldCuspParams::new(lambda, beta, mu);
            let z = match (&row.cache, spec.family) {
                (Some(Ok(col)), FamilyTag::Invisible) if !row.contains_beta_zero => {
                    params.validate()?;
                    col.system(lambda)
                }
                (Some(Err(e)), _) => return Err(Error::NotFound(e.clone())),
                _ => build_system(spec.family, params)?,
            };
            let cache = row.cache.as_ref().and_then(|c| c.as_ref().ok());
            let sig = signature_with(&z, &z.default_window(), cache)?;
            Ok((classify_signature(&sig, slice), sig))
        })();
        match result {
            Ok((cls, sig)) => {
                cell.n_pseudo = sig.non_virtual_pseudo();
                cell.n_cycles = sig.cycles.len();
                match cls {
                    Classification::Case { label, class } => {
                        cell.label = Some(label);
                        cell.class = Some(class);
                    }
                    Classification::BoundaryUnresolved { reason } => cell.failure = Some(reason),
                }
            }
            Err(e) => cell.failure = Some(e.to_string()),
        }
        cell
    });

    let mut label_counts = BTreeMap::new();
    for c in &cells {
        if let Some(l) = c.label {
            *label_counts.entry(l.to_string()).or_insert(0) += 1;
        }
    }
    let failures = cells.iter().filter(|c| c.failure.is_some()).count();
    let mut curves: Vec<BoundaryCurve> = Vec::new();
    for row in &rows {
        if row.beta <= 0.0 || row.contains_beta_zero {
            continue;
        }
        let cache = row.cache.as_ref().and_then(|c| c.as_ref().ok());
        for (name, v) in curves_at(spec.family, row.beta, cache) {
            if v < spec.lambda_range.0 || v > spec.lambda_range.1 {
                continue;
            }
            match curves.iter_mut().find(|c| c.name == name) {
                Some(c) => c.points.push((v, row.beta)),
                None => curves.push(BoundaryCurve {
                    name,
                    points: vec![(v, row.beta)],
                }),
            }
        }
    }
    Ok(BifDiagram {
        spec: *spec,
        cells,
        label_counts,
        curves,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify(l: f64, b: f64, m: f64) -> Classification {
        classify_case(FoldCuspParams::new(l, b, m), FamilyTag::Invisible, None)
            .unwrap()
            .0
    }

    fn label(l: f64, b: f64, m: f64) -> String {
        classify(l, b, m).label().map(|l| l.to_string()).unwrap_or_else(|| format!("{:?}", classify(l, b, m)))
    }

    #[test]
    fn signature_examples() {
        let z = build_system(FamilyTag::Invisible, FoldCuspParams::new(0.0, -1.0, 0.0)).unwrap();
        let sig = signature(&z).unwrap();
        assert_eq!(sig.beta_sign, ParamSign::Negative);
        let word: Vec<_> = sig.layout.iter().map(|r| r.2).collect();
        assert_eq!(word, vec![SigmaPointClass::Escaping, SigmaPointClass::Crossing]);
        assert!(sig.cycles.is_empty());
        // H's numerator −x² − x + β + λ has no real root when 1 + 4(β + λ) < 0.
        assert_eq!(sig.non_virtual_pseudo(), 0);
        // Closer to the organizing center the Σ-repeller p1 exists.
        let z = build_system(FamilyTag::Invisible, FoldCuspParams::new(0.0, -0.1, 0.0)).unwrap();
        let sig = signature(&z).unwrap();
        let p1 = sig
            .pseudo
            .iter()
            .filter(|p| !p.is_virtual())
            .min_by(|a, b| a.location.abs().total_cmp(&b.location.abs()))
            .unwrap();
        assert_eq!(p1.kind, crate::switching::PseudoKind::SigmaRepeller);
        assert!((p1.location - (-1.0 + 0.6f64.sqrt()) / 2.0).abs() < 1e-9);

        let z = build_system(FamilyTag::Invisible, FoldCuspParams::new(1.0, 1.0, 0.0)).unwrap();
        let sig = signature(&z).unwrap();
        assert!(sig.two_fold && sig.loop_a_c);

        let z = build_system(FamilyTag::Invisible, FoldCuspParams::new(-2.0, 1.0, 0.0)).unwrap();
        let sig = signature(&z).unwrap();
        let order: Vec<_> = sig.points.iter().map(|p| p.name).collect();
        assert!(order.iter().position(|&n| n == "d") < order.iter().position(|&n| n == "a"));
        let mid = sig.layout.iter().find(|r| r.0 < 0.0 && r.1 > 0.0).unwrap();
        assert_eq!(mid.2, SigmaPointClass::Sliding);
        assert!((mid.0 + 1.0).abs() < 1e-9 && (mid.1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(label(0.0, -1.0, 0.0), "1_1");
        assert_eq!(label(4.0 / 2.0, 0.25, 0.0), "17_1");
        assert_eq!(label(1.0, 1.0, 0.0), "10_1");
        let (c, _) = classify_case(FoldCuspParams::new(0.0, 1.0, 0.0), FamilyTag::Visible, None).unwrap();
        assert_eq!(c.label().unwrap().to_string(), "9_B");
    }

    #[test]
    fn theorem_one_sequence_at_small_beta() {
        // Small β: the far root of H stays outside the escaping segment.
        let b: f64 = 0.01;
        let s = b.sqrt();
        let l1 = find_L1(b, 0.0).unwrap().lambda;
        let pts = [
            (-3.0 * s, "5_1"),
            (-s, "6_1"),
            (-0.5 * s, "7_1"),
            (0.0, "8_1"),
            (0.5 * s, "9_1"),
            (s, "10_1"),
            (0.5 * (s + l1), "11_1"),
            (l1, "12_1"),
            (0.5 * (l1 + 2.0 * s), "13_1"),
            (2.0 * s, "14_1"),
            (2.5 * s, "15_1"),
            (3.0 * s, "16_1"),
            (4.0 * s, "17_1"),
        ];
        for (l, want) in pts {
            assert_eq!(label(l, b, 0.0), want, "lambda = {l}");
        }
    }

    #[test]
    fn mu_slices() {
        let b: f64 = 0.01;
        let s = b.sqrt();
        for (mu, tag) in [(-0.1 * s, "2"), (0.1 * s, "3")] {
            let m = InvisibleMaps::new(FoldCuspParams::new(0.0, b, mu)).unwrap();
            let l1 = find_L1(b, mu).unwrap().lambda;
            let (ll, bc, c) = (m.lambda_loop(), m.lambda_bc(), m.c);
            let mut seq = vec![-3.0 * s, -s, -0.5 * s, 0.0];
            let (p, q) = if mu < 0.0 { (ll, s) } else { (s, ll) };
            seq.extend([0.5 * p, p, 0.5 * (p + q), q, 0.5 * (q + l1), l1, 0.5 * (l1 + bc), bc]);
            seq.extend([0.5 * (bc + c), c, 4.0 * s]);
            for (k, l) in seq.into_iter().enumerate() {
                let want = format!("{}_{tag}", k + 5);
                assert_eq!(label(l, b, mu), want, "mu = {mu}, lambda = {l}");
            }
        }
    }

    #[test]
    fn census_mismatch_is_unresolved() {
        // Case-7 ordering at β = 1, but the sliding return to `a` is stopped
        // by the second zero of H, so no case matches.
        match classify(-0.5, 1.0, 0.0) {
            Classification::BoundaryUnresolved { reason } => assert!(reason.contains("7_1")),
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn equivalence_table() {
        let classes: std::collections::BTreeSet<_> = CaseLabel::all()
            .into_iter()
            .filter(|l| l.tag != TheoremTag::TB)
            .map(equivalence_class)
            .collect();
        assert_eq!(classes.len(), 23);
        let b = |s: &str| equivalence_class(CaseLabel::parse(s).unwrap());
        assert_eq!(b("9_2"), b("9_1"));
        assert_eq!(b("13_3"), b("11_1"));
        assert_ne!(b("10_2"), b("10_1"));
        assert_eq!(b("1_B"), EquivClass::B(1));
    }

    #[test]
    fn equal_classes_have_equal_signatures() {
        let b: f64 = 0.04;
        let s = b.sqrt();
        let mu = 0.1 * s;
        let key = |l: f64, m: f64| {
            let z = build_system(FamilyTag::Invisible, FoldCuspParams::new(l, b, m)).unwrap();
            signature(&z).unwrap().topological_key()
        };
        assert_eq!(key(-0.1, 0.0), key(-0.1, mu));
        assert_eq!(key(0.1, 0.0), key(0.1, -mu));
        let l1 = find_L1(b, 0.0).unwrap().lambda;
        let l1p = find_L1(b, mu).unwrap().lambda;
        let llp = s + mu / 2.0;
        assert_eq!(key(0.5 * (s + l1), 0.0), key(0.5 * (llp + l1p), mu));
        assert_ne!(key(0.5 * (s + l1), 0.0), key(0.5 * (l1 + 2.0 * s), 0.0));
    }

    #[test]
    fn l1_bracket() {
        let sol = find_L1(1.0, 0.0).unwrap();
        assert!(sol.lambda > 1.0 && sol.lambda < 2.0);
        assert!(sol.residual_fixed < 1e-9 && sol.residual_slope < 1e-9);
        let sol = find_L1(0.25, 0.0).unwrap();
        assert!(sol.lambda > 0.5 && sol.lambda < 1.0);
        assert!(sol.residual_fixed < 1e-9 && sol.residual_slope < 1e-9);
    }

    #[test]
    fn small_sweep_runs_both_ways() {
        let spec = GridSpec::new(FamilyTag::Invisible, 12, MuSpec::Fixed(0.0));
        let a = sweep(&spec, Execution::Sequential).unwrap();
        let b = sweep(&spec, Execution::Parallel).unwrap();
        assert_eq!(a.cells.len(), 144);
        let la: Vec<_> = a.cells.iter().map(|c| c.label).collect();
        let lb: Vec<_> = b.cells.iter().map(|c| c.label).collect();
        assert_eq!(la, lb);
    }
}
