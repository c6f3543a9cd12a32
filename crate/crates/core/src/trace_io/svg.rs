use std::fmt::Write as _;

use super::{validate_trace, FormatError, SceneDoc, TraceDoc};
use super::trace::TraceKind;
use crate::geometry::Vec2;
use crate::robot::StableState;

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    /// Viewport pixels per world length unit.
    pub px_per_unit: f64,
    /// Blank border around the content, in triangle sides.
    pub margin_sides: f64,
    /// Centroid polyline; `None` draws it for plan traces only.
    pub path: Option<bool>,
    /// Decimal places for every emitted coordinate.
    pub precision: usize,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            px_per_unit: 100.0,
            margin_sides: 0.5,
            path: None,
            precision: 3,
        }
    }
}

/// World to viewport: `X = (x - x0) k`, `Y = (y1 - y) k`, with `(x0, y1)` the
/// top-left corner of the padded content box and `k = px_per_unit`.
struct View {
    x0: f64,
    y1: f64,
    k: f64,
    prec: usize,
}

impl View {
    fn num(&self, v: f64) -> String {
        let s = format!("{:.*}", self.prec, v);
        // "-0.000" and friends print as zero
        if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
            s[1..].to_string()
        } else {
            s
        }
    }

    fn x(&self, x: f64) -> String {
        self.num((x - self.x0) * self.k)
    }

    fn y(&self, y: f64) -> String {
        self.num((self.y1 - y) * self.k)
    }

    fn len(&self, d: f64) -> String {
        self.num(d * self.k)
    }

    fn points<'a>(&self, pts: impl IntoIterator<Item = &'a [f64; 2]>) -> String {
        pts.into_iter()
            .map(|p| format!("{},{}", self.x(p[0]), self.y(p[1])))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn fill(state: StableState) -> &'static str {
    match state {
        StableState::Hu => "#9ecae1",
        StableState::Hd => "#a1d99b",
        StableState::Sd => "#fdd0a2",
    }
}

/// Renders footprints, obstacles, target and arena. Emits exactly one shape
/// element per trace record plus one per arena, obstacle and target; the
/// centroid polyline is an overlay outside that count.
pub fn render_svg(trace: &TraceDoc, scene: Option<&SceneDoc>, opts: &SvgOptions) -> Result<String, FormatError> {
    validate_trace(trace)?;
    if !(opts.px_per_unit.is_finite() && opts.px_per_unit > 0.0 && opts.margin_sides.is_finite() && opts.margin_sides >= 0.0) {
        return Err(FormatError::Invalid("svg scale must be positive and margin non-negative".into()));
    }
    let scene = scene.map(|d| d.to_scene().map(|s| (d, s))).transpose()?;
    let s = trace.header.geometry.tri_side;

    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |p: Vec2| {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    };
    for r in &trace.records {
        r.footprint.iter().for_each(|p| grow(Vec2::new(p[0], p[1])));
    }
    if let Some((_, sc)) = &scene {
        if let Some(a) = sc.arena {
            grow(a.min);
            grow(a.max);
        }
        sc.obstacles.iter().flat_map(|o| o.vertices()).for_each(|v| grow(*v));
        let t = sc.tolerance;
        grow(sc.target - Vec2::new(t, t));
        grow(sc.target + Vec2::new(t, t));
    }
    if !lo.x.is_finite() {
        lo = Vec2::new(-s, -s);
        hi = Vec2::new(s, s);
    }
    let m = opts.margin_sides * s;
    let view = View {
        x0: lo.x - m,
        y1: hi.y + m,
        k: opts.px_per_unit,
        prec: opts.precision,
    };
    let width = view.len(hi.x - lo.x + 2.0 * m);
    let height = view.len(hi.y - lo.y + 2.0 * m);
    let stroke = view.len(0.01 * s);

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    if let Some((_, sc)) = &scene {
        out.push_str("<g id=\"scene\">\n");
        if let Some(a) = sc.arena {
            let _ = writeln!(
                out,
                "<rect class=\"arena\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888888\" stroke-width=\"{stroke}\"/>",
                view.x(a.min.x),
                view.y(a.max.y),
                view.len(a.width()),
                view.len(a.height())
            );
        }
        for o in &sc.obstacles {
            let pts: Vec<[f64; 2]> = o.vertices().iter().map(|v| [v.x, v.y]).collect();
            let _ = writeln!(out, "<polygon class=\"obstacle\" points=\"{}\" fill=\"#202020\"/>", view.points(&pts));
        }
        out.push_str("</g>\n");
    }
    out.push_str("<g id=\"trace\">\n");
    for r in &trace.records {
        let _ = writeln!(
            out,
            "<polygon class=\"footprint {}\" points=\"{}\" fill=\"{}\" fill-opacity=\"0.5\" stroke=\"#303030\" stroke-width=\"{stroke}\"/>",
            r.state,
            view.points(&r.footprint),
            fill(r.state)
        );
    }
    out.push_str("</g>\n");
    if let Some((_, sc)) = &scene {
        let _ = writeln!(
            out,
            "<circle class=\"target\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#ffd700\" fill-opacity=\"0.8\" stroke=\"#a08000\" stroke-width=\"{stroke}\"/>",
            view.x(sc.target.x),
            view.y(sc.target.y),
            view.len(sc.tolerance)
        );
    }
    let draw_path = opts.path.unwrap_or(trace.header.kind == TraceKind::Plan);
    if draw_path && trace.records.len() > 1 {
        let pts: Vec<[f64; 2]> = trace.records.iter().map(|r| [r.x, r.y]).collect();
        let _ = writeln!(
            out,
            "<polyline class=\"path\" points=\"{}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"{}\"/>",
            view.points(&pts),
            view.len(0.02 * s)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
