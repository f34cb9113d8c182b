//! Self-contained SVG output: phase portraits and bifurcation diagrams.

use std::fmt::Write as _;

use foldcusp::bifurcation::{BifDiagram, CaseLabel};
use foldcusp::planefield::{FieldTag, OrbitArc, Point2, Window};
use foldcusp::retmaps::{CanardCycle, CycleStability};
use foldcusp::switching::{PseudoEquilibrium, PseudoKind, SigmaPointClass, Tangency, TangencyKind};
use foldcusp::trajectory::Trajectory;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 24.0;

const CROSSING: &str = "#8c8c8c";
const SLIDING: &str = "#1f5fbf";
const ESCAPING: &str = "#c0392b";
const CYCLE: &str = "#1e8449";

/// Everything drawn in a phase portrait.
pub struct PortraitScene<'a> {
    pub title: String,
    pub window: Window,
    pub layout: &'a [(f64, f64, SigmaPointClass)],
    pub tangencies: &'a [Tangency],
    pub pseudo: &'a [PseudoEquilibrium],
    pub trajectories: &'a [Trajectory],
    pub cycles: &'a [CanardCycle],
}

struct Frame {
    r: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x + self.r) / (2.0 * self.r) * (SIZE - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        MARGIN + (self.r - y) / (2.0 * self.r) * (SIZE - 2.0 * MARGIN)
    }

    fn polyline(&self, pts: impl Iterator<Item = Point2>) -> String {
        let mut s = String::new();
        for p in pts {
            let _ = write!(s, "{:.2},{:.2} ", self.px(p.x), self.py(p.y));
        }
        s.trim_end().to_string()
    }
}

fn header(out: &mut String, w: f64, h: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>"##);
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn arc_color(tag: FieldTag) -> &'static str {
    match tag {
        FieldTag::X => "#404040",
        FieldTag::Y => "#7a5c2e",
        FieldTag::Sliding => SLIDING,
    }
}

fn region_color(c: SigmaPointClass) -> &'static str {
    match c {
        SigmaPointClass::Sliding => SLIDING,
        SigmaPointClass::Escaping => ESCAPING,
        _ => CROSSING,
    }
}

pub fn portrait_svg(scene: &PortraitScene) -> String {
    let f = Frame { r: scene.window.radius };
    let mut s = String::new();
    header(&mut s, SIZE, SIZE, &scene.title);
    let (lo, hi) = (f.px(-f.r), f.px(f.r));
    let _ = writeln!(
        s,
        r#"<clipPath id="w"><rect x="{lo:.2}" y="{lo:.2}" width="{:.2}" height="{:.2}"/></clipPath>"#,
        hi - lo,
        hi - lo
    );
    let _ = writeln!(
        s,
        r##"<rect x="{lo:.2}" y="{lo:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#cccccc"/>"##,
        hi - lo,
        hi - lo
    );
    // Vertical dotted lines through the tangency abscissas.
    for t in scene.tangencies {
        let x = f.px(t.location);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{lo:.2}" x2="{x:.2}" y2="{hi:.2}" stroke="#999999" stroke-dasharray="2,3"/>"##
        );
    }
    let _ = writeln!(s, r#"<g clip-path="url(#w)" fill="none" stroke-width="1">"#);
    for traj in scene.trajectories {
        for arc in &traj.arcs {
            draw_arc(&mut s, &f, arc, arc_color(arc.field_tag), None, 1.0);
        }
    }
    for c in scene.cycles {
        let dash = match c.stability {
            CycleStability::Attracting => None,
            CycleStability::Repelling => Some("6,4"),
            CycleStability::TwoSided => Some("2,2"),
        };
        for arc in &c.arcs {
            draw_arc(&mut s, &f, arc, CYCLE, dash, 2.0);
        }
    }
    let _ = writeln!(s, "</g>");
    // Σ segments by region.
    let y0 = f.py(0.0);
    for &(a, b, class) in scene.layout {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="{}" stroke-width="3"/>"#,
            f.px(a),
            f.px(b),
            region_color(class)
        );
    }
    for t in scene.tangencies {
        let x = f.px(t.location);
        let _ = match t.kind {
            TangencyKind::FoldVisible => writeln!(
                s,
                r##"<circle cx="{x:.2}" cy="{y0:.2}" r="4" fill="#000000"/>"##
            ),
            TangencyKind::FoldInvisible => writeln!(
                s,
                r##"<circle cx="{x:.2}" cy="{y0:.2}" r="4" fill="#ffffff" stroke="#000000"/>"##
            ),
            _ => writeln!(
                s,
                r##"<path d="M{:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2} Z" fill="#ffffff" stroke="#000000"/>"##,
                x - 5.0,
                y0 + 4.0,
                x,
                y0 - 6.0,
                x + 5.0,
                y0 + 4.0
            ),
        };
    }
    for p in scene.pseudo {
        let x = f.px(p.location);
        let _ = match p.kind {
            PseudoKind::SigmaAttractor => writeln!(
                s,
                r##"<rect x="{:.2}" y="{:.2}" width="7" height="7" fill="{SLIDING}"/>"##,
                x - 3.5,
                y0 - 3.5
            ),
            PseudoKind::SigmaRepeller => writeln!(
                s,
                r##"<rect x="{:.2}" y="{:.2}" width="7" height="7" fill="#ffffff" stroke="{ESCAPING}"/>"##,
                x - 3.5,
                y0 - 3.5
            ),
            PseudoKind::Virtual => writeln!(
                s,
                r##"<path d="M{:.2},{:.2} l6,6 m0,-6 l-6,6" stroke="#aaaaaa"/>"##,
                x - 3.0,
                y0 - 3.0
            ),
            _ => writeln!(
                s,
                r##"<path d="M{:.2},{:.2} l8,8 m0,-8 l-8,8" stroke="#000000"/>"##,
                x - 4.0,
                y0 - 4.0
            ),
        };
    }
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="16">{}</text>"#, escape(&scene.title));
    s.push_str("</svg>\n");
    s
}

fn draw_arc(s: &mut String, f: &Frame, arc: &OrbitArc, color: &str, dash: Option<&str>, width: f64) {
    if arc.samples.len() < 2 {
        return;
    }
    let dash = dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" stroke="{color}" stroke-width="{width}"{dash}/>"#,
        f.polyline(arc.samples.iter().map(|(_, p)| *p))
    );
}

/// Fixed palette indexed by the label's position in the full case list.
fn label_color(label: CaseLabel) -> String {
    let idx = CaseLabel::all().iter().position(|l| *l == label).unwrap_or(0);
    let hue = (idx * 137) % 360;
    let light = 55 + (idx % 3) * 10;
    format!("hsl({hue},60%,{light}%)")
}

pub fn diagram_svg(d: &BifDiagram, title: &str) -> String {
    let legend_w = 120.0;
    let (w, h) = (SIZE + legend_w, SIZE);
    let mut s = String::new();
    header(&mut s, w, h, title);
    let spec = &d.spec;
    let (l0, l1) = spec.lambda_range;
    let (b0, b1) = spec.beta_range;
    let plot = SIZE - 2.0 * MARGIN;
    let px = |l: f64| MARGIN + (l - l0) / (l1 - l0) * plot;
    let py = |b: f64| MARGIN + (b1 - b) / (b1 - b0) * plot;
    let cw = plot / spec.n_lambda as f64;
    let ch = plot / spec.n_beta as f64;
    for c in &d.cells {
        let fill = c.label.map_or_else(|| "#f0f0f0".to_string(), label_color);
        let x = MARGIN + c.i as f64 * cw;
        let y = MARGIN + (spec.n_beta - 1 - c.j) as f64 * ch;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
            cw + 0.05,
            ch + 0.05
        );
    }
    for curve in &d.curves {
        let pts: String = curve
            .points
            .iter()
            .filter(|(l, _)| *l >= l0 && *l <= l1)
            .map(|(l, b)| format!("{:.2},{:.2}", px(*l), py(*b)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            s,
            r##"<polyline points="{pts}" fill="none" stroke="#000000" stroke-width="1"><title>{}</title></polyline>"##,
            escape(curve.name)
        );
    }
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{plot}" height="{plot}" fill="none" stroke="#000000"/>"##
    );
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="16">{}</text>"#, escape(title));
    let mut y = MARGIN + 10.0;
    for label in d.distinct_labels() {
        let _ = writeln!(
            s,
            r##"<rect x="{:.1}" y="{:.1}" width="12" height="12" fill="{}" stroke="#000000" stroke-width="0.5"/><text x="{:.1}" y="{:.1}">{label}</text>"##,
            SIZE + 4.0,
            y - 10.0,
            label_color(label),
            SIZE + 22.0,
            y
        );
        y += 16.0;
    }
    s.push_str("</svg>\n");
    s
}
