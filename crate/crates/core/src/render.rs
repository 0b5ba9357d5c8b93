//! Standalone SVG 1.1 figures for CCDF curves and density estimates.
//!
//! Output is plain text built in a fixed order, so identical inputs give
//! byte-identical documents. Curve vertices are written with the shortest
//! round-trip decimal form of each coordinate and can be mapped back to data
//! space through [`PlotFrame`].

use std::fmt::Write as _;

use thiserror::Error;

use crate::summary::{CcdfCurve, DensityEstimate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("curve has no points to draw")]
    EmptyCurve,
    #[error("invalid density estimate: {0}")]
    InvalidDensity(String),
    #[error("invalid plot configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrokeStyle {
    pub color: String,
    pub width: f64,
    /// SVG `stroke-dasharray` value, solid when `None`.
    pub dash: Option<String>,
}

impl StrokeStyle {
    fn attributes(&self) -> String {
        let mut s = format!(
            r#"fill="none" stroke="{}" stroke-width="{}""#,
            escape(&self.color),
            self.width
        );
        if let Some(d) = &self.dash {
            let _ = write!(s, r#" stroke-dasharray="{}""#, escape(d));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotConfig {
    pub width_px: u32,
    pub height_px: u32,
    pub title: Option<String>,
    pub x_label: String,
    pub y_label: String,
    pub positive_style: StrokeStyle,
    pub negative_style: StrokeStyle,
    /// Label the probability axis ends "near 0%" / "near 100%" because a
    /// finite sample cannot show the exact tails of unbounded support.
    pub unbounded_support: bool,
}

impl Default for PlotConfig {
    fn default() -> Self {
        PlotConfig {
            width_px: 960,
            height_px: 600,
            title: None,
            x_label: "Minimum effect size".to_string(),
            y_label: "Probability of an effect beyond the minimum size".to_string(),
            positive_style: StrokeStyle {
                color: "#1f4e79".to_string(),
                width: 2.0,
                dash: None,
            },
            negative_style: StrokeStyle {
                color: "#b03a2e".to_string(),
                width: 2.0,
                dash: Some("8 4".to_string()),
            },
            unbounded_support: true,
        }
    }
}

impl PlotConfig {
    /// Defaults with axis labels for a density plot.
    pub fn density() -> Self {
        PlotConfig {
            x_label: "Effect size".to_string(),
            y_label: "Density".to_string(),
            ..PlotConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        if self.width_px < 100 || self.height_px < 100 {
            return Err(RenderError::InvalidConfig(format!(
                "plot must be at least 100x100 px, got {}x{}",
                self.width_px, self.height_px
            )));
        }
        Ok(())
    }

    fn y_tick_labels(&self) -> [(f64, &'static str); 5] {
        if self.unbounded_support {
            [(0.0, "near 0%"), (0.25, "25%"), (0.5, "50%"), (0.75, "75%"), (1.0, "near 100%")]
        } else {
            [(0.0, "0%"), (0.25, "25%"), (0.5, "50%"), (0.75, "75%"), (1.0, "100%")]
        }
    }
}

const MARGIN_LEFT: f64 = 96.0;
const MARGIN_RIGHT: f64 = 32.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 72.0;

/// Affine map from a data interval onto a pixel interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisMap {
    pub data_lo: f64,
    pub data_hi: f64,
    pub px_lo: f64,
    pub px_hi: f64,
}

impl AxisMap {
    pub fn to_px(&self, v: f64) -> f64 {
        self.px_lo + (v - self.data_lo) / (self.data_hi - self.data_lo) * (self.px_hi - self.px_lo)
    }

    pub fn to_data(&self, px: f64) -> f64 {
        self.data_lo + (px - self.px_lo) / (self.px_hi - self.px_lo) * (self.data_hi - self.data_lo)
    }
}

/// Data rectangle of a figure and its two axis maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotFrame {
    pub x: AxisMap,
    pub y: AxisMap,
}

impl PlotFrame {
    fn new(cfg: &PlotConfig, (x_lo, x_hi): (f64, f64), (y_lo, y_hi): (f64, f64)) -> PlotFrame {
        let (x_lo, x_hi) = if x_hi > x_lo { (x_lo, x_hi) } else { (x_lo - 0.5, x_hi + 0.5) };
        PlotFrame {
            x: AxisMap {
                data_lo: x_lo,
                data_hi: x_hi,
                px_lo: MARGIN_LEFT,
                px_hi: cfg.width_px as f64 - MARGIN_RIGHT,
            },
            y: AxisMap {
                data_lo: y_lo,
                data_hi: y_hi,
                px_lo: cfg.height_px as f64 - MARGIN_BOTTOM,
                px_hi: MARGIN_TOP,
            },
        }
    }

    pub fn left(&self) -> f64 {
        self.x.px_lo
    }

    pub fn right(&self) -> f64 {
        self.x.px_hi
    }

    pub fn top(&self) -> f64 {
        self.y.px_hi
    }

    pub fn bottom(&self) -> f64 {
        self.y.px_lo
    }

    pub fn contains(&self, px: f64, py: f64) -> bool {
        (self.left()..=self.right()).contains(&px) && (self.top()..=self.bottom()).contains(&py)
    }
}

/// Frame used by [`render_ccdf`] for this curve.
pub fn ccdf_frame(curve: &CcdfCurve, cfg: &PlotConfig) -> Result<PlotFrame, RenderError> {
    let range = curve.threshold_range().ok_or(RenderError::EmptyCurve)?;
    Ok(PlotFrame::new(cfg, range, (0.0, 1.0)))
}

fn check_density(dens: &DensityEstimate) -> Result<(), RenderError> {
    let bad = |m: &str| Err(RenderError::InvalidDensity(m.to_string()));
    if dens.grid.len() != dens.density.len() {
        return bad("grid and density lengths differ");
    }
    if dens.grid.len() < 2 {
        return bad("need at least two grid points");
    }
    if dens.grid.iter().chain(&dens.density).any(|v| !v.is_finite()) {
        return bad("non-finite value");
    }
    if dens.density.iter().any(|&d| d < 0.0) {
        return bad("negative density");
    }
    if dens.grid.windows(2).any(|w| w[1] <= w[0]) {
        return bad("grid must be strictly increasing");
    }
    Ok(())
}

/// Frame used by [`render_density`] for this estimate.
pub fn density_frame(dens: &DensityEstimate, cfg: &PlotConfig) -> Result<PlotFrame, RenderError> {
    check_density(dens)?;
    let peak = dens.density.iter().copied().fold(0.0, f64::max);
    let top = if peak > 0.0 { peak * 1.05 } else { 1.0 };
    Ok(PlotFrame::new(
        cfg,
        (dens.grid[0], dens.grid[dens.grid.len() - 1]),
        (0.0, top),
    ))
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

/// Tick positions at 1, 2 or 5 times a power of ten.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> (Vec<f64>, usize) {
    let span = hi - lo;
    if !(span > 0.0) {
        return (vec![lo], 0);
    }
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    let ticks = (first..=last).map(|k| k as f64 * step).collect();
    (ticks, decimals)
}

fn format_tick(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    // no "-0" labels
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

struct Svg {
    out: String,
}

impl Svg {
    fn new(cfg: &PlotConfig) -> Svg {
        let mut out = String::new();
        let (w, h) = (cfg.width_px, cfg.height_px);
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="14">"#
        );
        let _ = writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
        Svg { out }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, attrs: &str) {
        let _ = writeln!(self.out, r#"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" {attrs}/>"#);
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, extra: &str, body: &str) {
        let _ = writeln!(
            self.out,
            r#"<text x="{x}" y="{y}" text-anchor="{anchor}"{extra}>{}</text>"#,
            escape(body)
        );
    }

    fn polyline(&mut self, class: &str, style: &StrokeStyle, points: impl Iterator<Item = (f64, f64)>) {
        let coords: Vec<String> = points.map(|(x, y)| format!("{x},{y}")).collect();
        let _ = writeln!(
            self.out,
            r#"<polyline class="{class}" {} points="{}"/>"#,
            style.attributes(),
            coords.join(" ")
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

const AXIS: &str = r#"stroke="black" stroke-width="1""#;
const GRID: &str = r##"stroke="#d9d9d9" stroke-width="1""##;

fn draw_frame(svg: &mut Svg, frame: &PlotFrame, cfg: &PlotConfig, y_ticks: &[(f64, String)]) {
    let (l, r, t, b) = (frame.left(), frame.right(), frame.top(), frame.bottom());

    for (v, label) in y_ticks {
        let y = frame.y.to_px(*v);
        svg.line(l, y, r, y, GRID);
        svg.line(l - 5.0, y, l, y, AXIS);
        svg.text(l - 8.0, y + 5.0, "end", "", label);
    }
    let (x_ticks, decimals) = nice_ticks(frame.x.data_lo, frame.x.data_hi, 8);
    for v in x_ticks {
        let x = frame.x.to_px(v);
        svg.line(x, b, x, b + 5.0, AXIS);
        svg.text(x, b + 22.0, "middle", "", &format_tick(v, decimals));
    }

    svg.line(l, b, r, b, AXIS);
    svg.line(l, t, l, b, AXIS);

    let cx = (l + r) / 2.0;
    svg.text(cx, cfg.height_px as f64 - 20.0, "middle", "", &cfg.x_label);
    let cy = (t + b) / 2.0;
    svg.text(
        24.0,
        cy,
        "middle",
        &format!(r#" transform="rotate(-90 24 {cy})""#),
        &cfg.y_label,
    );
    if let Some(title) = &cfg.title {
        svg.text(cx, 28.0, "middle", r#" font-size="16""#, title);
    }
}

/// CCDF figure: both branches on one signed threshold axis.
pub fn render_ccdf(curve: &CcdfCurve, cfg: &PlotConfig) -> Result<String, RenderError> {
    cfg.validate()?;
    let frame = ccdf_frame(curve, cfg)?;
    let mut svg = Svg::new(cfg);
    let ticks: Vec<(f64, String)> = cfg
        .y_tick_labels()
        .iter()
        .map(|&(v, s)| (v, s.to_string()))
        .collect();
    draw_frame(&mut svg, &frame, cfg, &ticks);

    if frame.x.data_lo < 0.0 && frame.x.data_hi > 0.0 {
        let x0 = frame.x.to_px(0.0);
        svg.line(x0, frame.top(), x0, frame.bottom(), r##"stroke="#7f7f7f" stroke-width="1" stroke-dasharray="2 3""##);
    }

    let map = |p: &crate::summary::CcdfPoint| (frame.x.to_px(p.threshold), frame.y.to_px(p.probability));
    let mut legend = Vec::new();
    if !curve.negative_branch.is_empty() {
        svg.polyline("ccdf-negative", &cfg.negative_style, curve.negative_branch.iter().map(map));
        legend.push(("P(effect < x)", &cfg.negative_style));
    }
    if !curve.positive_branch.is_empty() {
        svg.polyline("ccdf-positive", &cfg.positive_style, curve.positive_branch.iter().map(map));
        legend.push(("P(effect > x)", &cfg.positive_style));
    }

    for (i, (label, style)) in legend.into_iter().enumerate() {
        let y = frame.top() + 16.0 + 20.0 * i as f64;
        let x = frame.right() - 170.0;
        svg.line(x, y, x + 30.0, y, &style.attributes());
        svg.text(x + 38.0, y + 5.0, "start", "", label);
    }
    Ok(svg.finish())
}

/// Density figure: one polyline over the estimate's grid.
pub fn render_density(dens: &DensityEstimate, cfg: &PlotConfig) -> Result<String, RenderError> {
    cfg.validate()?;
    let frame = density_frame(dens, cfg)?;
    let mut svg = Svg::new(cfg);
    let (ticks, decimals) = nice_ticks(frame.y.data_lo, frame.y.data_hi, 5);
    let ticks: Vec<(f64, String)> = ticks.into_iter().map(|v| (v, format_tick(v, decimals))).collect();
    draw_frame(&mut svg, &frame, cfg, &ticks);
    svg.polyline(
        "density",
        &cfg.positive_style,
        dens.grid
            .iter()
            .zip(&dens.density)
            .map(|(&x, &d)| (frame.x.to_px(x), frame.y.to_px(d))),
    );
    Ok(svg.finish())
}

/// Vertices of the polyline with the given class attribute, in pixels.
pub fn polyline_vertices(svg: &str, class: &str) -> Option<Vec<(f64, f64)>> {
    let marker = format!(r#"<polyline class="{class}""#);
    let start = svg.find(&marker)?;
    let rest = &svg[start..];
    let points_at = rest.find(r#"points=""#)? + r#"points=""#.len();
    let end = rest[points_at..].find('"')?;
    rest[points_at..points_at + end]
        .split(' ')
        .map(|pair| {
            let (x, y) = pair.split_once(',')?;
            Some((x.parse().ok()?, y.parse().ok()?))
        })
        .collect()
}
