//! Standalone SVG rendering: dotted charts over relative time and
//! yearly trend lines. Output is deterministic, byte for byte, for
//! equal inputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::eventlog::EventLog;
use crate::metrics::YearlySeries;

#[derive(Debug, Clone, PartialEq)]
pub struct DottedChartSpec {
    /// Dots beyond this relative-time horizon are clipped.
    pub window_days: i64,
    pub width_px: u32,
    pub height_px: u32,
    /// Explicit activity colors; activities not listed get stable
    /// auto-assigned colors (lexicographic activity order).
    pub color_map: BTreeMap<String, String>,
    pub dot_radius_px: f64,
}

impl Default for DottedChartSpec {
    fn default() -> Self {
        DottedChartSpec {
            window_days: 1461,
            width_px: 1000,
            height_px: 600,
            color_map: BTreeMap::new(),
            dot_radius_px: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChartSpec {
    pub series: Vec<(String, YearlySeries)>,
    pub width_px: u32,
    pub height_px: u32,
    pub y_label: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum VizError {
    #[error("cannot render an empty log")]
    EmptyLog,
    #[error("every chart series must be nonempty")]
    EmptySeries,
}

fn escape_xml(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Deterministic distinct colors: golden-angle hue walk over three
/// lightness bands, nudged on the rare hex collision.
fn auto_palette(n: usize) -> Vec<String> {
    let mut used: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();
    let mut colors = Vec::with_capacity(n);
    for i in 0..n {
        let hue = (i as f64 * 137.0) % 360.0;
        let mut lightness = 0.38 + 0.12 * ((i % 3) as f64);
        let mut hex = hsl_to_hex(hue, 0.65, lightness);
        while used.contains(&hex) {
            lightness = (lightness + 0.01).min(0.95);
            hex = hsl_to_hex(hue, 0.65, lightness);
        }
        used.insert(hex.clone());
        colors.push(hex);
    }
    colors
}

fn hsl_to_hex(h: f64, s: f64, l: f64) -> String {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to_byte = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", to_byte(r1), to_byte(g1), to_byte(b1))
}

fn svg_header(width: u32, height: u32) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n\
         <rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    )
}

/// Each trace is one horizontal row ordered by ascending cycle time
/// (ties by case id), every event a dot at its day offset from the
/// trace start, colored by activity. Dots beyond the window are
/// clipped; the legend maps activities to colors.
pub fn render_dotted_chart(log: &EventLog, spec: &DottedChartSpec) -> Result<String, VizError> {
    if log.traces.is_empty() {
        return Err(VizError::EmptyLog);
    }

    let margin_left = 60.0;
    let margin_right = 170.0;
    let margin_top = 20.0;
    let margin_bottom = 45.0;
    let plot_width = spec.width_px as f64 - margin_left - margin_right;
    let plot_height = spec.height_px as f64 - margin_top - margin_bottom;

    // row order: ascending cycle time, ties by case id
    let mut order: Vec<usize> = (0..log.traces.len()).collect();
    let cycle = |i: usize| -> i64 {
        let t = &log.traces[i];
        match (t.start_date(), t.end_date()) {
            (Some(first), Some(last)) => (last - first).num_days(),
            _ => 0,
        }
    };
    order.sort_by(|&a, &b| {
        cycle(a)
            .cmp(&cycle(b))
            .then_with(|| log.traces[a].case_id.cmp(&log.traces[b].case_id))
    });

    let activities: Vec<String> = log.activities().into_iter().collect();
    let palette = auto_palette(activities.len());
    let color_of: BTreeMap<&str, String> = activities
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let color = spec
                .color_map
                .get(a)
                .cloned()
                .unwrap_or_else(|| palette[i].clone());
            (a.as_str(), color)
        })
        .collect();

    let x_of = |days: i64| margin_left + days as f64 / spec.window_days as f64 * plot_width;
    let row_height = plot_height / order.len() as f64;

    let mut svg = svg_header(spec.width_px, spec.height_px);
    // axes
    let _ = writeln!(
        svg,
        "<line x1=\"{l:.2}\" y1=\"{b:.2}\" x2=\"{r:.2}\" y2=\"{b:.2}\" stroke=\"black\" stroke-width=\"1\"/>\n\
         <line x1=\"{l:.2}\" y1=\"{t:.2}\" x2=\"{l:.2}\" y2=\"{b:.2}\" stroke=\"black\" stroke-width=\"1\"/>",
        l = margin_left,
        r = margin_left + plot_width,
        t = margin_top,
        b = margin_top + plot_height,
    );
    let mut tick = 0i64;
    while tick <= spec.window_days {
        let x = x_of(tick);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{y1:.2}\" x2=\"{x:.2}\" y2=\"{y2:.2}\" stroke=\"black\" stroke-width=\"1\"/>\n\
             <text x=\"{x:.2}\" y=\"{ty:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{tick}</text>",
            y1 = margin_top + plot_height,
            y2 = margin_top + plot_height + 4.0,
            ty = margin_top + plot_height + 16.0,
        );
        tick += 365;
    }
    let _ = writeln!(
        svg,
        "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">days since case start</text>\n\
         <text x=\"14\" y=\"{my:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 {my:.2})\">cases by cycle time</text>",
        x = margin_left + plot_width / 2.0,
        y = margin_top + plot_height + 32.0,
        my = margin_top + plot_height / 2.0,
    );

    // dots
    for (row_index, &trace_index) in order.iter().enumerate() {
        let trace = &log.traces[trace_index];
        let Some(start) = trace.start_date() else {
            continue;
        };
        let y = margin_top + (row_index as f64 + 0.5) * row_height;
        for event in &trace.events {
            let Some(ts) = event.timestamp else { continue };
            let offset = (ts - start).num_days();
            if offset > spec.window_days {
                continue;
            }
            let color = color_of
                .get(event.activity.as_str())
                .map(String::as_str)
                .unwrap_or("#000000");
            let _ = writeln!(
                svg,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r}\" fill=\"{color}\"/>",
                x = x_of(offset),
                r = spec.dot_radius_px,
            );
        }
    }

    // legend
    let legend_x = margin_left + plot_width + 12.0;
    for (i, activity) in activities.iter().enumerate() {
        let y = margin_top + 8.0 + i as f64 * 14.0;
        let color = &color_of[activity.as_str()];
        let _ = writeln!(
            svg,
            "<rect x=\"{legend_x:.2}\" y=\"{ry:.2}\" width=\"9\" height=\"9\" fill=\"{color}\"/>\n\
             <text x=\"{tx:.2}\" y=\"{ty:.2}\" font-family=\"sans-serif\" font-size=\"10\">{label}</text>",
            ry = y - 8.0,
            tx = legend_x + 13.0,
            ty = y,
            label = escape_xml(activity),
        );
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// One polyline per series over a shared year axis, each with a point
/// marker per year, distinct colors, and a legend. The y axis runs
/// from 0 to 1.05 times the largest value.
pub fn render_yearly_lines(spec: &LineChartSpec) -> Result<String, VizError> {
    if spec.series.is_empty() || spec.series.iter().any(|(_, s)| s.points.is_empty()) {
        return Err(VizError::EmptySeries);
    }

    let margin_left = 60.0;
    let margin_right = 150.0;
    let margin_top = 20.0;
    let margin_bottom = 45.0;
    let plot_width = spec.width_px as f64 - margin_left - margin_right;
    let plot_height = spec.height_px as f64 - margin_top - margin_bottom;

    let year_min = spec
        .series
        .iter()
        .flat_map(|(_, s)| s.points.keys().copied())
        .min()
        .expect("nonempty");
    let year_max = spec
        .series
        .iter()
        .flat_map(|(_, s)| s.points.keys().copied())
        .max()
        .expect("nonempty");
    let value_max = spec
        .series
        .iter()
        .flat_map(|(_, s)| s.points.values().copied())
        .fold(0.0_f64, f64::max);
    let y_top = if value_max > 0.0 {
        value_max * 1.05
    } else {
        1.0
    };
    let year_span = (year_max - year_min).max(1) as f64;

    let x_of = |year: i32| margin_left + (year - year_min) as f64 / year_span * plot_width;
    let y_of = |value: f64| margin_top + (1.0 - value / y_top) * plot_height;

    let mut svg = svg_header(spec.width_px, spec.height_px);
    let _ = writeln!(
        svg,
        "<line x1=\"{l:.2}\" y1=\"{b:.2}\" x2=\"{r:.2}\" y2=\"{b:.2}\" stroke=\"black\" stroke-width=\"1\"/>\n\
         <line x1=\"{l:.2}\" y1=\"{t:.2}\" x2=\"{l:.2}\" y2=\"{b:.2}\" stroke=\"black\" stroke-width=\"1\"/>",
        l = margin_left,
        r = margin_left + plot_width,
        t = margin_top,
        b = margin_top + plot_height,
    );

    // x ticks: at most ~12 year labels
    let year_step = (((year_max - year_min) as f64 / 12.0).ceil() as i32).max(1);
    let mut year = year_min;
    while year <= year_max {
        let x = x_of(year);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{y1:.2}\" x2=\"{x:.2}\" y2=\"{y2:.2}\" stroke=\"black\" stroke-width=\"1\"/>\n\
             <text x=\"{x:.2}\" y=\"{ty:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{year}</text>",
            y1 = margin_top + plot_height,
            y2 = margin_top + plot_height + 4.0,
            ty = margin_top + plot_height + 16.0,
        );
        year += year_step;
    }
    // y ticks: 5 round intervals
    for i in 0..=5 {
        let value = y_top * f64::from(i) / 5.0;
        let y = y_of(value);
        let _ = writeln!(
            svg,
            "<line x1=\"{x1:.2}\" y1=\"{y:.2}\" x2=\"{x2:.2}\" y2=\"{y:.2}\" stroke=\"black\" stroke-width=\"1\"/>\n\
             <text x=\"{tx:.2}\" y=\"{ty:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{value:.1}</text>",
            x1 = margin_left - 4.0,
            x2 = margin_left,
            tx = margin_left - 7.0,
            ty = y + 3.0,
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{my:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 {my:.2})\">{label}</text>",
        my = margin_top + plot_height / 2.0,
        label = escape_xml(&spec.y_label),
    );

    let palette = auto_palette(spec.series.len());
    for (series_index, (label, series)) in spec.series.iter().enumerate() {
        let color = &palette[series_index];
        let points: Vec<String> = series
            .points
            .iter()
            .map(|(year, value)| format!("{:.2},{:.2}", x_of(*year), y_of(*value)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.join(" "),
        );
        for (year, value) in &series.points {
            let _ = writeln!(
                svg,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.5\" fill=\"{color}\"/>",
                x = x_of(*year),
                y = y_of(*value),
            );
        }
        // legend entry
        let ly = margin_top + 10.0 + series_index as f64 * 16.0;
        let lx = margin_left + plot_width + 12.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{lx2:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>\n\
             <text x=\"{tx:.2}\" y=\"{ty:.2}\" font-family=\"sans-serif\" font-size=\"10\">{label}</text>",
            lx2 = lx + 16.0,
            tx = lx + 20.0,
            ty = ly + 3.0,
            label = escape_xml(label),
        );
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
