//! Self-contained SVG emission for the four figure layouts the pipelines
//! reproduce: a g(vhat) curve, the stability-boundary map with iso-Mach
//! overlays, the contour/image pair, and the evolution snapshot panel.

use crate::artifact::EffectiveConfig;
use crate::error::{Error, Result};
use std::fmt::Write as _;

/// One dataset per figure kind.
pub enum SvgDataset<'a> {
    GCurve {
        points: &'a [(f64, f64)],
        label: String,
    },
    BoundaryMap {
        /// (gamma, v_plus) polylines for the two condition boundaries.
        mn: &'a [(f64, f64)],
        sharp: &'a [(f64, f64)],
        /// labeled iso-Mach curves (dotted overlays).
        iso: &'a [(String, Vec<(f64, f64)>)],
    },
    ContourPair {
        contour: &'a [(f64, f64)],
        image: &'a [(f64, f64)],
    },
    SnapshotPanel {
        x: &'a [f64],
        /// (time, v-field, u-field) per slice; up to four are drawn.
        slices: &'a [(f64, Vec<f64>, Vec<f64>)],
    },
}

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 320.0;
const MARGIN: f64 = 48.0;

struct Panel {
    origin_x: f64,
    origin_y: f64,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Panel {
    fn from_ranges(ox: f64, oy: f64, xs: (f64, f64), ys: (f64, f64)) -> Panel {
        let pad = |lo: f64, hi: f64| {
            let span = (hi - lo).abs().max(1e-12);
            (lo - 0.05 * span, hi + 0.05 * span)
        };
        let (x_min, x_max) = pad(xs.0, xs.1);
        let (y_min, y_max) = pad(ys.0, ys.1);
        Panel {
            origin_x: ox,
            origin_y: oy,
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let w = PANEL_W - 2.0 * MARGIN;
        let h = PANEL_H - 2.0 * MARGIN;
        let px = self.origin_x + MARGIN + (x - self.x_min) / (self.x_max - self.x_min) * w;
        let py = self.origin_y + PANEL_H - MARGIN - (y - self.y_min) / (self.y_max - self.y_min) * h;
        (px, py)
    }

    fn polyline(&self, out: &mut String, pts: &[(f64, f64)], style: &str) {
        if pts.is_empty() {
            return;
        }
        out.push_str("<polyline fill=\"none\" ");
        out.push_str(style);
        out.push_str(" points=\"");
        for (i, (x, y)) in pts.iter().enumerate() {
            let (px, py) = self.map(*x, *y);
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{px:.2},{py:.2}");
        }
        out.push_str("\"/>\n");
    }

    fn frame(&self, out: &mut String, x_label: &str, y_label: &str, title: &str) {
        let (x0, y0) = (self.origin_x + MARGIN, self.origin_y + MARGIN);
        let w = PANEL_W - 2.0 * MARGIN;
        let h = PANEL_H - 2.0 * MARGIN;
        let _ = writeln!(
            out,
            "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>"
        );
        for k in 0..=4 {
            let fx = self.x_min + (self.x_max - self.x_min) * k as f64 / 4.0;
            let (px, _) = self.map(fx, self.y_min);
            let ty = self.origin_y + PANEL_H - MARGIN + 14.0;
            let _ = writeln!(
                out,
                "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#333\" stroke-width=\"1\"/>",
                self.origin_y + PANEL_H - MARGIN,
                self.origin_y + PANEL_H - MARGIN + 4.0
            );
            let _ = writeln!(
                out,
                "<text x=\"{px:.2}\" y=\"{ty:.2}\" font-size=\"9\" text-anchor=\"middle\">{}</text>",
                tick_label(fx)
            );
            let fy = self.y_min + (self.y_max - self.y_min) * k as f64 / 4.0;
            let (_, py) = self.map(self.x_min, fy);
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#333\" stroke-width=\"1\"/>",
                self.origin_x + MARGIN - 4.0,
                self.origin_x + MARGIN
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"9\" text-anchor=\"end\">{}</text>",
                self.origin_x + MARGIN - 6.0,
                py + 3.0,
                tick_label(fy)
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{x_label}</text>",
            self.origin_x + PANEL_W / 2.0,
            self.origin_y + PANEL_H - 10.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 {:.2} {:.2})\">{y_label}</text>",
            self.origin_x + 14.0,
            self.origin_y + PANEL_H / 2.0,
            self.origin_x + 14.0,
            self.origin_y + PANEL_H / 2.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{title}</text>",
            self.origin_x + PANEL_W / 2.0,
            self.origin_y + 20.0
        );
    }

    fn zero_line(&self, out: &mut String) {
        if self.y_min < 0.0 && self.y_max > 0.0 {
            let (x1, y) = self.map(self.x_min, 0.0);
            let (x2, _) = self.map(self.x_max, 0.0);
            let _ = writeln!(
                out,
                "<line x1=\"{x1:.2}\" y1=\"{y:.2}\" x2=\"{x2:.2}\" y2=\"{y:.2}\" stroke=\"#aaa\" stroke-width=\"0.7\" stroke-dasharray=\"4 3\"/>"
            );
        }
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn range_of<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    (lo, hi)
}

/// Render the dataset as a self-contained SVG with the run config embedded
/// as a leading comment.
pub fn emit_svg(dataset: &SvgDataset, config: &EffectiveConfig) -> Result<String> {
    let (width, height) = match dataset {
        SvgDataset::ContourPair { .. } => (2.0 * PANEL_W, PANEL_H),
        SvgDataset::SnapshotPanel { .. } => (2.0 * PANEL_W, 2.0 * PANEL_H),
        _ => (PANEL_W, PANEL_H),
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">"
    );
    out.push_str(&config.svg_comment());
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    match dataset {
        SvgDataset::GCurve { points, label } => {
            if points.is_empty() {
                return Err(Error::EmptyDataset);
            }
            let xr = range_of(points.iter().map(|(x, _)| x));
            let yr = range_of(points.iter().map(|(_, y)| y));
            let panel = Panel::from_ranges(0.0, 0.0, xr, yr);
            panel.frame(&mut out, "vhat", "g(vhat)", label);
            panel.zero_line(&mut out);
            panel.polyline(&mut out, points, "stroke=\"#0a4da0\" stroke-width=\"1.5\"");
        }
        SvgDataset::BoundaryMap { mn, sharp, iso } => {
            if mn.is_empty() && sharp.is_empty() {
                return Err(Error::EmptyDataset);
            }
            let all = mn.iter().chain(sharp.iter());
            let xr = range_of(all.clone().map(|(x, _)| x));
            let yr = range_of(all.map(|(_, y)| y));
            let panel = Panel::from_ranges(0.0, 0.0, xr, (0.0_f64.min(yr.0), yr.1));
            panel.frame(&mut out, "gamma", "v_plus", "stability boundaries");
            panel.polyline(&mut out, mn, "stroke=\"#0a4da0\" stroke-width=\"1.8\"");
            panel.polyline(&mut out, sharp, "stroke=\"#a01010\" stroke-width=\"1.8\"");
            for (label, curve) in iso.iter() {
                panel.polyline(
                    &mut out,
                    curve,
                    "stroke=\"#555\" stroke-width=\"1\" stroke-dasharray=\"2 3\"",
                );
                if let Some((gx, gy)) = curve.last() {
                    let (px, py) = panel.map(*gx, *gy);
                    let _ = writeln!(
                        out,
                        "<text x=\"{:.2}\" y=\"{py:.2}\" font-size=\"9\">{label}</text>",
                        px - 30.0
                    );
                }
            }
        }
        SvgDataset::ContourPair { contour, image } => {
            if contour.is_empty() || image.is_empty() {
                return Err(Error::EmptyDataset);
            }
            let cxr = range_of(contour.iter().map(|(x, _)| x));
            let cyr = range_of(contour.iter().map(|(_, y)| y));
            let left = Panel::from_ranges(0.0, 0.0, cxr, cyr);
            left.frame(&mut out, "Re lambda", "Im lambda", "contour");
            left.zero_line(&mut out);
            left.polyline(&mut out, contour, "stroke=\"#0a4da0\" stroke-width=\"1.5\"");
            let ixr = range_of(image.iter().map(|(x, _)| x));
            let iyr = range_of(image.iter().map(|(_, y)| y));
            let right = Panel::from_ranges(PANEL_W, 0.0, ixr, iyr);
            right.frame(&mut out, "Re D", "Im D", "Evans image");
            right.zero_line(&mut out);
            right.polyline(&mut out, image, "stroke=\"#a01010\" stroke-width=\"1.5\"");
        }
        SvgDataset::SnapshotPanel { x, slices } => {
            if x.is_empty() || slices.is_empty() {
                return Err(Error::EmptyDataset);
            }
            let xr = range_of(x.iter());
            for (k, (time, v, u)) in slices.iter().take(4).enumerate() {
                let ox = (k % 2) as f64 * PANEL_W;
                let oy = (k / 2) as f64 * PANEL_H;
                let yr_v = range_of(v.iter());
                let yr_u = range_of(u.iter());
                let yr = (yr_v.0.min(yr_u.0), yr_v.1.max(yr_u.1));
                let panel = Panel::from_ranges(ox, oy, xr, yr);
                panel.frame(&mut out, "x", "v, u", &format!("t = {time:.2}"));
                let pv: Vec<(f64, f64)> = x.iter().copied().zip(v.iter().copied()).collect();
                let pu: Vec<(f64, f64)> = x.iter().copied().zip(u.iter().copied()).collect();
                panel.polyline(&mut out, &pv, "stroke=\"#0a4da0\" stroke-width=\"1.4\"");
                panel.polyline(&mut out, &pu, "stroke=\"#a01010\" stroke-width=\"1.4\"");
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
