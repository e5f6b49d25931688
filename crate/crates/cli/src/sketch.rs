//! Decorative SVG sketches of orbits, supports and cylinders.

use entrolab::perturb::{ChainReport, ClosingReport};
use entrolab::{ElongatedNbhd, Point, Rect, SolidCylinder};

const WIDTH: f64 = 600.0;

struct Canvas {
    shapes: Vec<String>,
    pts: Vec<Point>,
}

fn coords(pts: &[Point]) -> String {
    pts.iter().map(|p| format!("{},{}", p.x, p.y)).collect::<Vec<_>>().join(" ")
}

impl Canvas {
    fn new() -> Self {
        Canvas { shapes: Vec::new(), pts: Vec::new() }
    }

    fn outline(&mut self, pts: Vec<Point>, color: &str, closed: bool) {
        let c = coords(&pts);
        let style = |n: &str| format!("fill:none;stroke:{color};stroke-width:1.5;vector-effect:non-scaling-stroke{n}");
        if closed {
            self.shapes.push(format!(r#"<polygon points="{c}" style="{}"/>"#, style("")));
        } else {
            self.shapes.push(format!(r#"<polyline points="{c}" style="{}"/>"#, style(";stroke-dasharray:4 3")));
        }
        self.pts.extend(pts);
    }

    fn cylinder(&mut self, c: &SolidCylinder, color: &str) {
        self.outline(c.corners().to_vec(), color, true);
    }

    fn capsule(&mut self, e: &ElongatedNbhd, color: &str) {
        let d = e.q - e.p;
        let base = if d.norm() > 0.0 { d.y.atan2(d.x) } else { 0.0 };
        let k = 32;
        let mut pts = Vec::with_capacity(2 * k + 2);
        for (end, start) in [(e.q, base - std::f64::consts::FRAC_PI_2), (e.p, base + std::f64::consts::FRAC_PI_2)] {
            for i in 0..=k {
                let a = start + std::f64::consts::PI * i as f64 / k as f64;
                pts.push(end + Point::new(a.cos(), a.sin()) * e.r);
            }
        }
        self.outline(pts, color, true);
    }

    fn dots(&mut self, pts: &[Point], r: f64, color: &str) {
        for p in pts {
            self.shapes.push(format!(r#"<circle cx="{}" cy="{}" r="{r}" style="fill:{color}"/>"#, p.x, p.y));
        }
        self.pts.extend_from_slice(pts);
    }

    fn render(self) -> String {
        let frame = Rect::bounding(&self.pts).unwrap_or(Rect { min: Point::ORIGIN, max: Point::new(1.0, 1.0) });
        let pad = 0.05 * frame.width().max(frame.height()).max(1e-9);
        let f = frame.expand(pad);
        let height = WIDTH * f.height() / f.width();
        let mut out = format!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="{} {} {} {}">"#,
            f.min.x,
            f.min.y,
            f.width(),
            f.height()
        );
        out.push_str(&format!("\n<g transform=\"matrix(1 0 0 -1 0 {})\">\n", f.min.y + f.max.y));
        for s in self.shapes {
            out.push_str(&s);
            out.push('\n');
        }
        out.push_str("</g>\n</svg>\n");
        out
    }
}

/// Orbit segment, the support of the closing perturbation and its ends.
pub fn closing(report: &ClosingReport) -> String {
    let mut c = Canvas::new();
    let seg = &report.segment;
    let r = 0.004 * Rect::bounding(&seg.orbit).map_or(1.0, |b| b.diam().max(1e-6));
    c.dots(&seg.orbit, r, "#888");
    if let Some(e) = &report.support {
        c.capsule(e, "#c33");
    }
    c.dots(&[seg.x, seg.end()], 2.0 * r, "#c33");
    c.render()
}

/// Chain cylinders C_0, …, C_{k0} and the orbit points they surround.
pub fn chain(report: &ChainReport, orbit: &[Point]) -> String {
    let mut c = Canvas::new();
    for (j, cyl) in report.cylinders.iter().enumerate() {
        c.cylinder(cyl, if j == 0 { "#c33" } else { "#36c" });
    }
    c.dots(orbit, 0.2 * report.rho_c.max(1e-9), "#333");
    c.render()
}

/// Source and target cylinders with the image of the source boundary.
pub fn crossing(source: &SolidCylinder, target: &SolidCylinder, image: Vec<Point>) -> String {
    let mut c = Canvas::new();
    c.cylinder(target, "#36c");
    c.cylinder(source, "#888");
    c.outline(image, "#c33", false);
    c.render()
}
