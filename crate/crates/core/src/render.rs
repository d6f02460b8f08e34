//! Deterministic SVG drawings of covering instances and point instances.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cds::CdsInstance;
use crate::geom::{Point, Segment};
use crate::reduction::{GadgetCertificate, Parity, PointInstance};
use crate::triangulation::Triangulation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderSpec {
    pub width: u32,
    pub height: u32,
    pub margin: u32,
    pub stabbers: bool,
    pub targets: bool,
    pub pairs: bool,
    pub triangulation: bool,
    pub labels: bool,
    pub even_width: f64,
    pub odd_width: f64,
    pub clause_width: f64,
    pub odd_dash: String,
    pub target_radius: f64,
    pub pair_radius: f64,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            width: 800,
            height: 600,
            margin: 20,
            stabbers: true,
            targets: true,
            pairs: true,
            triangulation: true,
            labels: false,
            even_width: 3.0,
            odd_width: 1.5,
            clause_width: 0.75,
            odd_dash: "1.5,3".into(),
            target_radius: 3.0,
            pair_radius: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("render dimensions must be positive")]
    BadDimensions,
}

/// Affine map from the bounding box of the scene into the viewport, y up.
struct View {
    min: (f64, f64),
    scale: f64,
    off: (f64, f64),
    height: f64,
}

impl View {
    fn fit<'a>(points: impl Iterator<Item = &'a Point>, spec: &RenderSpec) -> View {
        let mut lo = (f64::INFINITY, f64::INFINITY);
        let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            let (x, y) = p.to_f64();
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        if !lo.0.is_finite() {
            lo = (0.0, 0.0);
            hi = (1.0, 1.0);
        }
        let (w, h) = ((spec.width - 2 * spec.margin) as f64, (spec.height - 2 * spec.margin) as f64);
        let dx = (hi.0 - lo.0).max(f64::MIN_POSITIVE);
        let dy = (hi.1 - lo.1).max(f64::MIN_POSITIVE);
        let scale = (w / dx).min(h / dy);
        let off = (
            spec.margin as f64 + (w - dx * scale) / 2.0,
            spec.margin as f64 + (h - dy * scale) / 2.0,
        );
        View { min: lo, scale, off, height: spec.height as f64 }
    }

    fn map(&self, p: &Point) -> (f64, f64) {
        let (x, y) = p.to_f64();
        let sx = self.off.0 + (x - self.min.0) * self.scale;
        let sy = self.height - (self.off.1 + (y - self.min.1) * self.scale);
        (sx, sy)
    }
}

struct Svg {
    out: String,
}

impl Svg {
    fn new(spec: &RenderSpec) -> Result<Svg, RenderError> {
        if spec.width == 0 || spec.height == 0 || 2 * spec.margin >= spec.width.min(spec.height) {
            return Err(RenderError::BadDimensions);
        }
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
            w = spec.width,
            h = spec.height
        );
        let _ = writeln!(out, "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>", spec.width, spec.height);
        Ok(Svg { out })
    }

    fn open(&mut self, id: &str, attrs: &str) {
        let _ = writeln!(self.out, "<g id=\"{id}\" {attrs}>");
    }

    fn close(&mut self) {
        self.out.push_str("</g>\n");
    }

    fn line(&mut self, v: &View, s: &Segment) {
        let (a, b) = (v.map(&s.a), v.map(&s.b));
        let _ = writeln!(self.out, "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\"/>", a.0, a.1, b.0, b.1);
    }

    fn dot(&mut self, v: &View, p: &Point, r: f64) {
        let c = v.map(p);
        let _ = writeln!(self.out, "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"{r}\"/>", c.0, c.1);
    }

    fn label(&mut self, v: &View, p: &Point, text: &str) {
        let c = v.map(p);
        let _ = writeln!(self.out, "<text x=\"{:.3}\" y=\"{:.3}\">{text}</text>", c.0 + 4.0, c.1 - 4.0);
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn stroke(width: f64, dash: Option<&str>) -> String {
    let mut s = format!("stroke=\"black\" stroke-width=\"{width}\" fill=\"none\"");
    if let Some(d) = dash {
        let _ = write!(s, " stroke-dasharray=\"{d}\"");
    }
    s
}

/// Draws a covering instance. With a certificate, variable sides are split
/// into bold even and dotted odd layers and clause segments are thin;
/// without one every stabber is drawn thin.
pub fn render_cds(inst: &CdsInstance, cert: Option<&GadgetCertificate>, spec: &RenderSpec) -> Result<String, RenderError> {
    let mut svg = Svg::new(spec)?;
    let view = View::fit(
        inst.stabbers().iter().flat_map(|s| [&s.a, &s.b]).chain(inst.targets()),
        spec,
    );
    if spec.stabbers {
        let mut even = Vec::new();
        let mut odd = Vec::new();
        if let Some(c) = cert {
            for g in &c.variables {
                even.extend(g.segments_of(Parity::Even));
                odd.extend(g.segments_of(Parity::Odd));
            }
        }
        let rest: Vec<usize> = (0..inst.stabbers().len()).filter(|s| !even.contains(s) && !odd.contains(s)).collect();
        for (id, list, st) in [
            ("even", &even, stroke(spec.even_width, None)),
            ("odd", &odd, stroke(spec.odd_width, Some(&spec.odd_dash))),
            ("clause", &rest, stroke(spec.clause_width, None)),
        ] {
            svg.open(id, &st);
            for &s in list.iter() {
                svg.line(&view, &inst.stabbers()[s]);
            }
            svg.close();
        }
    }
    if spec.targets {
        svg.open("targets", "fill=\"black\"");
        for t in inst.targets() {
            svg.dot(&view, t, spec.target_radius);
        }
        svg.close();
    }
    if spec.labels {
        svg.open("labels", "font-size=\"10\" font-family=\"sans-serif\"");
        for (i, t) in inst.targets().iter().enumerate() {
            svg.label(&view, t, &format!("t{i}"));
        }
        svg.close();
    }
    Ok(svg.finish())
}

/// Draws a point instance: stabber edges, ε-pairs and optionally a triangulation.
pub fn render_points(pi: &PointInstance, tri: Option<&Triangulation>, spec: &RenderSpec) -> Result<String, RenderError> {
    let mut svg = Svg::new(spec)?;
    let pts = pi.points.points();
    let view = View::fit(pts.iter(), spec);
    if spec.triangulation {
        if let Some(t) = tri {
            svg.open("triangulation", &stroke(0.5, Some("4,2")));
            for e in &t.edges {
                svg.line(&view, &pi.points.segment(*e));
            }
            svg.close();
        }
    }
    if spec.stabbers {
        svg.open("stabbers", &stroke(spec.clause_width, None));
        for e in &pi.stabber_edges {
            svg.line(&view, &pi.points.segment(*e));
        }
        svg.close();
        svg.open("endpoints", "fill=\"black\"");
        let mut seen = Vec::new();
        for e in &pi.stabber_edges {
            for i in [e.i, e.j] {
                if !seen.contains(&i) {
                    seen.push(i);
                    svg.dot(&view, &pts[i], spec.pair_radius);
                }
            }
        }
        svg.close();
    }
    if spec.pairs {
        svg.open("pairs", "fill=\"white\" stroke=\"black\" stroke-width=\"0.5\"");
        for p in &pi.pairs {
            svg.dot(&view, &pts[p.t1], spec.pair_radius);
            svg.dot(&view, &pts[p.t2], spec.pair_radius);
        }
        svg.close();
    }
    if spec.labels {
        svg.open("labels", "font-size=\"10\" font-family=\"sans-serif\"");
        for (i, p) in pts.iter().enumerate() {
            svg.label(&view, p, &i.to_string());
        }
        svg.close();
    }
    Ok(svg.finish())
}

/// Number of elements with tag `tag` inside the group with id `group`.
pub fn layer_count(svg: &str, group: &str, tag: &str) -> usize {
    let open = format!("<g id=\"{group}\"");
    let Some(start) = svg.find(&open) else {
        return 0;
    };
    let body = &svg[start..];
    let end = body.find("</g>").unwrap_or(body.len());
    body[..end].matches(&format!("<{tag} ")).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::figure_formula;
    use crate::reduction::compile_3sat_to_cds;

    #[test]
    fn figure_layers() {
        let (inst, cert) = compile_3sat_to_cds(&figure_formula(), None).unwrap();
        let spec = RenderSpec::default();
        let a = render_cds(&inst, Some(&cert), &spec).unwrap();
        let b = render_cds(&inst, Some(&cert), &spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(layer_count(&a, "even", "line") + layer_count(&a, "odd", "line"), 18);
        assert_eq!(layer_count(&a, "even", "line"), 9);
        assert_eq!(layer_count(&a, "clause", "line"), 9);
        assert_eq!(layer_count(&a, "targets", "circle"), 21);
    }

    #[test]
    fn empty_canvas() {
        let svg = render_cds(&CdsInstance::empty(), None, &RenderSpec::default()).unwrap();
        assert!(svg.starts_with("<?xml") && svg.ends_with("</svg>\n"));
        assert_eq!(layer_count(&svg, "targets", "circle"), 0);
        let bad = RenderSpec { width: 0, ..RenderSpec::default() };
        assert_eq!(render_cds(&CdsInstance::empty(), None, &bad), Err(RenderError::BadDimensions));
    }
}
