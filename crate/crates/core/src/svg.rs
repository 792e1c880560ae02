//! Minimal SVG rendering for arenas, trajectories and time series.

use std::fmt::Write as _;

use crate::world::{Arena, Pose, Vec2};

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

struct Doc {
    out: String,
}

impl Doc {
    fn new(width: f64, height: f64) -> Self {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        Self { out }
    }

    fn polyline(&mut self, pts: impl IntoIterator<Item = (f64, f64)>, stroke: &str, width: f64) {
        let mut d = String::new();
        for (x, y) in pts {
            let _ = write!(d, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            self.out,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            d.trim_end()
        );
    }

    fn polygon(&mut self, pts: &[(f64, f64)], fill: &str) {
        let mut d = String::new();
        for (x, y) in pts {
            let _ = write!(d, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(self.out, r#"<polygon points="{}" fill="{fill}" stroke="black" stroke-width="0.5"/>"#, d.trim_end());
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(self.out, r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}"/>"#);
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(self.out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="{fill}"/>"#);
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(self.out, r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}">{}</text>"#, escape(s));
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// World-to-pixel transform with y pointing up.
struct View {
    min: Vec2,
    max: Vec2,
    scale: f64,
    margin: f64,
}

impl View {
    fn fit(arena: &Arena, scale: f64) -> Self {
        let mut min = arena.spawn;
        let mut max = arena.spawn;
        let mut grow = |p: Vec2| {
            min = min.inf(&p);
            max = max.sup(&p);
        };
        for w in &arena.walls {
            grow(w.min);
            grow(w.max);
        }
        for c in arena.obstacles.iter().chain(std::iter::once(&arena.beacon)) {
            grow(c.center - Vec2::repeat(c.radius));
            grow(c.center + Vec2::repeat(c.radius));
        }
        Self { min, max, scale, margin: 10.0 }
    }

    fn size(&self) -> (f64, f64) {
        let d = (self.max - self.min) * self.scale;
        (d.x + 2.0 * self.margin, d.y + 2.0 * self.margin + 16.0)
    }

    fn px(&self, p: Vec2) -> (f64, f64) {
        (
            self.margin + (p.x - self.min.x) * self.scale,
            self.margin + 16.0 + (self.max.y - p.y) * self.scale,
        )
    }
}

fn draw_arena(doc: &mut Doc, view: &View, arena: &Arena) {
    for w in &arena.walls {
        let (x0, y1) = view.px(w.min);
        let (x1, y0) = view.px(w.max);
        doc.rect(x0, y0, x1 - x0, y1 - y0, "#777");
    }
    for c in &arena.obstacles {
        let (x, y) = view.px(c.center);
        doc.circle(x, y, c.radius * view.scale, "#999");
    }
    let (x, y) = view.px(arena.beacon.center);
    doc.circle(x, y, arena.beacon.radius * view.scale, "#2ca02c");
    let (x, y) = view.px(arena.spawn);
    doc.circle(x, y, 3.0, "black");
}

/// Arena with one head trajectory per entry.
pub fn arena_overlay(arena: &Arena, title: &str, paths: &[(String, Vec<Vec2>)]) -> String {
    let view = View::fit(arena, 40.0);
    let (w, h) = view.size();
    let mut doc = Doc::new(w, h);
    doc.text(w / 2.0, 12.0, "middle", title);
    draw_arena(&mut doc, &view, arena);
    for (i, (label, path)) in paths.iter().enumerate() {
        doc.polyline(path.iter().map(|p| view.px(*p)), color(i), 1.5);
        if let Some(last) = path.last() {
            let (x, y) = view.px(*last);
            doc.text(x + 4.0, y, "start", label);
        }
    }
    doc.finish()
}

/// Arena with sensor rays from `origin` to each hit point.
pub fn lidar_view(arena: &Arena, origin: Vec2, hits: &[Vec2], caption: &str) -> String {
    let view = View::fit(arena, 40.0);
    let (w, h) = view.size();
    let mut doc = Doc::new(w, h);
    doc.text(w / 2.0, 12.0, "middle", caption);
    draw_arena(&mut doc, &view, arena);
    for hit in hits {
        doc.polyline([view.px(origin), view.px(*hit)], "#ff7f0e", 0.6);
    }
    let (x, y) = view.px(origin);
    doc.circle(x, y, 3.0, "#d62728");
    doc.finish()
}

/// One frame of the robot in the arena; links drawn as rectangles.
pub fn arena_frame(arena: &Arena, links: &[Pose], link_length: f64, link_width: f64, caption: &str) -> String {
    let view = View::fit(arena, 40.0);
    let (w, h) = view.size();
    let mut doc = Doc::new(w, h);
    doc.text(w / 2.0, 12.0, "middle", caption);
    draw_arena(&mut doc, &view, arena);
    for (i, p) in links.iter().enumerate() {
        let (s, c) = p.theta.sin_cos();
        let along = Vec2::new(c, s) * (link_length / 2.0);
        let across = Vec2::new(-s, c) * (link_width / 2.0);
        let center = p.position();
        let corners = [
            center + along + across,
            center + along - across,
            center - along - across,
            center - along + across,
        ]
        .map(|q| view.px(q));
        doc.polygon(&corners, if i == 0 { "#d62728" } else { "#1f77b4" });
    }
    doc.finish()
}

/// Stacked panels sharing the time axis.
pub fn time_series(title: &str, t: &[f64], panels: &[(&str, Vec<f64>)]) -> String {
    let (w, ph, left, right) = (720.0, 90.0, 70.0, 15.0);
    let h = 24.0 + panels.len() as f64 * (ph + 18.0) + 20.0;
    let mut doc = Doc::new(w, h);
    doc.text(w / 2.0, 14.0, "middle", title);
    let (t0, t1) = match (t.first(), t.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        (Some(&a), _) => (a, a + 1.0),
        _ => (0.0, 1.0),
    };
    let plot_w = w - left - right;
    for (i, (label, ys)) in panels.iter().enumerate() {
        let top = 24.0 + i as f64 * (ph + 18.0);
        let (mut lo, mut hi) = ys
            .iter()
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        doc.polyline([(left, top), (left, top + ph), (left + plot_w, top + ph)], "black", 0.8);
        let digits = (3.0 - (hi - lo).log10().floor()).clamp(0.0, 9.0) as usize;
        doc.text(left - 4.0, top + 8.0, "end", &format!("{hi:.digits$}"));
        doc.text(left - 4.0, top + ph, "end", &format!("{lo:.digits$}"));
        doc.text(left + 6.0, top + 10.0, "start", label);
        let pts = t
            .iter()
            .zip(ys.iter())
            .filter(|(_, y)| y.is_finite())
            .map(|(&x, &y)| (left + (x - t0) / (t1 - t0) * plot_w, top + ph - (y - lo) / (hi - lo) * ph));
        doc.polyline(pts, color(i), 1.0);
    }
    doc.text(left + plot_w, h - 6.0, "end", &format!("t [s] {t0:.2} .. {t1:.2}"));
    doc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_are_closed() {
        let a = Arena::preset("default").unwrap();
        let s = arena_overlay(&a, "x < y", &[("run".into(), vec![a.spawn, Vec2::new(1.0, 3.0)])]);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("x &lt; y"));
        assert_eq!(s.matches("<polyline").count(), 1);
        let ts = time_series("ts", &[0.0, 1.0], &[("a", vec![1.0, 2.0]), ("b", vec![3.0, 3.0])]);
        assert_eq!(ts.matches("<polyline").count(), 4);
    }

    #[test]
    fn y_axis_points_up() {
        let a = Arena::preset("default").unwrap();
        let v = View::fit(&a, 40.0);
        assert!(v.px(a.beacon.center).1 < v.px(a.spawn).1);
    }
}
