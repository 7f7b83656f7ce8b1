//! Static SVG scatter plots of principal coordinates.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::confidence::{Axis, ConfidenceRegion};
use crate::error::{Error, Result};

pub const CANVAS: f64 = 800.0;
const MARGIN: f64 = 80.0;

/// Which category points a plot shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotAxes {
    #[default]
    Rows,
    Columns,
    Both,
}

impl PlotAxes {
    fn shows(self, axis: Axis) -> bool {
        matches!(
            (self, axis),
            (PlotAxes::Both, _) | (PlotAxes::Rows, Axis::Row) | (PlotAxes::Columns, Axis::Column)
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            PlotAxes::Rows => "rows",
            PlotAxes::Columns => "columns",
            PlotAxes::Both => "both",
        }
    }
}

impl FromStr for PlotAxes {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rows" => Ok(PlotAxes::Rows),
            "columns" => Ok(PlotAxes::Columns),
            "both" => Ok(PlotAxes::Both),
            other => Err(Error::InvalidConfig(format!("unknown plot axes {other:?}"))),
        }
    }
}

/// Coordinates of one category on every retained dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryPoint {
    pub label: String,
    pub coords: Vec<f64>,
    pub origin_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotConfig<'a> {
    pub title: &'a str,
    /// 1-based dimensions on the horizontal and vertical axis.
    pub dims: (usize, usize),
    pub axes: PlotAxes,
}

#[derive(Debug, Clone, Copy)]
pub struct PlotCoordinates<'a> {
    pub rows: &'a [CategoryPoint],
    pub columns: &'a [CategoryPoint],
    /// Percent of inertia per dimension, used in the axis captions.
    pub contributions: &'a [f64],
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Fixed three-decimal pixel values; `+ 0.0` folds negative zero.
fn px(v: f64) -> String {
    format!("{:.3}", v + 0.0)
}

/// Renders the plane of `config.dims`. Confidence regions live in the plane
/// of dimensions 1 and 2 and are drawn only for that plane.
pub fn render_svg_plot(
    coords: &PlotCoordinates<'_>,
    regions: &[ConfidenceRegion],
    config: &PlotConfig<'_>,
) -> Result<String> {
    let max = coords.contributions.len();
    let (dx, dy) = config.dims;
    for dim in [dx, dy] {
        if dim == 0 || dim > max {
            return Err(Error::DimensionOutOfRange { dim, max });
        }
    }
    if dx == dy {
        return Err(Error::InvalidConfig(format!("plot dimensions must differ, got {dx} twice")));
    }

    let mut points: Vec<(&CategoryPoint, Axis)> = Vec::new();
    if config.axes.shows(Axis::Row) {
        points.extend(coords.rows.iter().map(|p| (p, Axis::Row)));
    }
    if config.axes.shows(Axis::Column) {
        points.extend(coords.columns.iter().map(|p| (p, Axis::Column)));
    }
    for (p, _) in &points {
        if p.coords.len() < max {
            return Err(Error::DimensionOutOfRange {
                dim: max,
                max: p.coords.len(),
            });
        }
    }
    let circles: Vec<&ConfidenceRegion> = if (dx, dy) == (1, 2) {
        regions.iter().filter(|r| config.axes.shows(r.axis)).collect()
    } else {
        Vec::new()
    };

    let mut extent: f64 = 0.0;
    for (p, _) in &points {
        extent = extent.max(p.coords[dx - 1].abs()).max(p.coords[dy - 1].abs());
    }
    for r in &circles {
        extent = extent
            .max(r.center.0.abs() + r.radius_x)
            .max(r.center.1.abs() + r.radius_y);
    }
    if !(extent > 0.0 && extent.is_finite()) {
        extent = 1.0;
    }
    let scale = (CANVAS / 2.0 - MARGIN) / (extent * 1.05);
    let c = CANVAS / 2.0;
    let sx = |x: f64| c + x * scale;
    let sy = |y: f64| c - y * scale;

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#,
        CANVAS
    );
    let _ = writeln!(w, r#"<rect x="0" y="0" width="{0}" height="{0}" fill="white"/>"#, CANVAS);
    let _ = writeln!(
        w,
        r#"<text x="{}" y="30" font-family="sans-serif" font-size="18" text-anchor="middle">{}</text>"#,
        px(c),
        escape(config.title)
    );
    // crosshair through the origin
    let _ = writeln!(
        w,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-width="1"/>"#,
        px(MARGIN / 2.0),
        px(c),
        px(CANVAS - MARGIN / 2.0),
        px(c)
    );
    let _ = writeln!(
        w,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-width="1"/>"#,
        px(c),
        px(MARGIN / 2.0),
        px(c),
        px(CANVAS - MARGIN / 2.0)
    );
    let _ = writeln!(
        w,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">principal axis {} ({:.1}%)</text>"#,
        px(c),
        px(CANVAS - 15.0),
        dx,
        coords.contributions[dx - 1] + 0.0
    );
    let _ = writeln!(
        w,
        r#"<text x="20" y="{0}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 20 {0})">principal axis {1} ({2:.1}%)</text>"#,
        px(c),
        dy,
        coords.contributions[dy - 1] + 0.0
    );

    for r in &circles {
        let colour = match r.axis {
            Axis::Row => "#1f77b4",
            Axis::Column => "#d62728",
        };
        let (cx, cy) = (px(sx(r.center.0)), px(sy(r.center.1)));
        let (rx, ry) = (r.radius_x * scale, r.radius_y * scale);
        if (rx - ry).abs() <= 1e-9 * rx.max(ry) {
            let _ = writeln!(
                w,
                r#"<circle cx="{cx}" cy="{cy}" r="{}" fill="none" stroke="{colour}" stroke-dasharray="4 3"/>"#,
                px(rx)
            );
        } else {
            let _ = writeln!(
                w,
                r#"<ellipse cx="{cx}" cy="{cy}" rx="{}" ry="{}" fill="none" stroke="{colour}" stroke-dasharray="4 3"/>"#,
                px(rx),
                px(ry)
            );
        }
    }
    for (p, axis) in &points {
        let (colour, shape_label) = match axis {
            Axis::Row => ("#1f77b4", escape(&p.label)),
            Axis::Column => ("#d62728", format!("{}'", escape(&p.label))),
        };
        let (x, y) = (sx(p.coords[dx - 1]), sy(p.coords[dy - 1]));
        let _ = writeln!(
            w,
            r#"<circle cx="{}" cy="{}" r="4" fill="{colour}"/>"#,
            px(x),
            px(y)
        );
        let _ = writeln!(
            w,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" fill="{colour}">{shape_label}</text>"#,
            px(x + 6.0),
            px(y - 6.0)
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(label: &str, coords: &[f64]) -> CategoryPoint {
        CategoryPoint {
            label: label.into(),
            coords: coords.to_vec(),
            origin_distance: coords.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }

    fn config(dims: (usize, usize)) -> PlotConfig<'static> {
        PlotConfig {
            title: "test",
            dims,
            axes: PlotAxes::Rows,
        }
    }

    #[test]
    fn all_zero_points_sit_on_crosshair() {
        let rows = vec![point("a", &[0.0, 0.0]), point("b", &[0.0, 0.0])];
        let coords = PlotCoordinates {
            rows: &rows,
            columns: &[],
            contributions: &[0.0, 0.0],
        };
        let svg = render_svg_plot(&coords, &[], &config((1, 2))).unwrap();
        assert_eq!(svg.matches(r#"<circle cx="400.000" cy="400.000" r="4""#).count(), 2);
        assert!(svg.contains("principal axis 1 (0.0%)"));
    }

    #[test]
    fn deterministic_and_escaped() {
        let rows = vec![point("a<b", &[0.1, -0.2, 0.0, 0.3]), point("c", &[-0.3, 0.1, 0.2, 0.0])];
        let coords = PlotCoordinates {
            rows: &rows,
            columns: &rows,
            contributions: &[40.0, 40.0, 10.0, 10.0],
        };
        let cfg = PlotConfig {
            title: "x & y",
            dims: (1, 2),
            axes: PlotAxes::Both,
        };
        let a = render_svg_plot(&coords, &[], &cfg).unwrap();
        let b = render_svg_plot(&coords, &[], &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("a&lt;b"));
        assert!(a.contains("x &amp; y"));
        assert!(a.contains(r#"width="800" height="800""#));
        assert!(a.contains("principal axis 2 (40.0%)"));
        let third = render_svg_plot(&coords, &[], &config((3, 4))).unwrap();
        assert!(third.contains("principal axis 3 (10.0%)"));
    }

    #[test]
    fn equal_scaling_on_both_axes() {
        let rows = vec![point("a", &[0.5, 0.0]), point("b", &[0.0, 0.5])];
        let coords = PlotCoordinates {
            rows: &rows,
            columns: &[],
            contributions: &[50.0, 50.0],
        };
        let svg = render_svg_plot(&coords, &[], &config((1, 2))).unwrap();
        let scale = (CANVAS / 2.0 - MARGIN) / (0.5 * 1.05);
        let off = px(400.0 + 0.5 * scale);
        let up = px(400.0 - 0.5 * scale);
        assert!(svg.contains(&format!(r#"<circle cx="{off}" cy="400.000" r="4""#)));
        assert!(svg.contains(&format!(r#"<circle cx="400.000" cy="{up}" r="4""#)));
    }

    #[test]
    fn regions_drawn_as_circles() {
        let rows = vec![point("a", &[0.5, 0.0, 0.0, 0.0])];
        let region = ConfidenceRegion {
            category: 0,
            label: "a".into(),
            axis: Axis::Row,
            center: (0.5, 0.0),
            radius_x: 0.1,
            radius_y: 0.1,
            alpha: 0.05,
            contains_origin: false,
        };
        let coords = PlotCoordinates {
            rows: &rows,
            columns: &[],
            contributions: &[45.0, 45.0, 5.0, 5.0],
        };
        let svg = render_svg_plot(&coords, &[region.clone()], &config((1, 2))).unwrap();
        assert_eq!(svg.matches("stroke-dasharray").count(), 1);
        let other = render_svg_plot(&coords, &[region], &config((3, 4))).unwrap();
        assert_eq!(other.matches("stroke-dasharray").count(), 0);
    }

    #[test]
    fn rejects_bad_dims() {
        let coords = PlotCoordinates {
            rows: &[],
            columns: &[],
            contributions: &[50.0, 50.0],
        };
        assert_eq!(
            render_svg_plot(&coords, &[], &config((1, 3))),
            Err(Error::DimensionOutOfRange { dim: 3, max: 2 })
        );
        assert!(render_svg_plot(&coords, &[], &config((2, 2))).is_err());
    }
}
