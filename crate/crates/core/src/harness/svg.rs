//! Static SVG scatter plots of record fields.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::experiment::TrialRecord;
use crate::error::Result;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScatterOptions {
    pub title: Option<String>,
    pub log_axes: bool,
    /// Draw the line y = x.
    pub reference_line: bool,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = values
            .map(|v| if log { v.log10() } else { v })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Self {
            lo: lo - pad,
            hi: hi + pad,
            log,
        }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn value_at(&self, unit: f64) -> f64 {
        let v = self.lo + unit * (self.hi - self.lo);
        if self.log {
            10f64.powf(v)
        } else {
            v
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render `y_field` against `x_field`, one marker per plottable record.
///
/// Records with a non-finite coordinate (or a nonpositive one on log axes)
/// are left out.
pub fn render_scatter(records: &[TrialRecord], x_field: &str, y_field: &str, opts: &ScatterOptions) -> Result<String> {
    let mut points = Vec::with_capacity(records.len());
    for r in records {
        let (x, y) = (r.field(x_field)?, r.field(y_field)?);
        let ok = |v: f64| v.is_finite() && (!opts.log_axes || v > 0.0);
        if ok(x) && ok(y) {
            points.push((x, y));
        }
    }
    // with a reference line both axes share one range so y = x is the diagonal
    let (xa, ya) = if opts.reference_line {
        let all = || points.iter().flat_map(|p| [p.0, p.1]);
        (Axis::fit(all(), opts.log_axes), Axis::fit(all(), opts.log_axes))
    } else {
        (
            Axis::fit(points.iter().map(|p| p.0), opts.log_axes),
            Axis::fit(points.iter().map(|p| p.1), opts.log_axes),
        )
    };
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let px = |v: f64| MARGIN + xa.unit(v) * plot_w;
    let py = |v: f64| HEIGHT - MARGIN - ya.unit(v) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (gx, gy) = (MARGIN + t * plot_w, HEIGHT - MARGIN - t * plot_h);
        let _ = writeln!(
            s,
            r#"<text x="{gx:.1}" y="{:.1}" text-anchor="middle">{:.3e}</text>"#,
            HEIGHT - MARGIN + 16.0,
            xa.value_at(t)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{gy:.1}" text-anchor="end">{:.3e}</text>"#,
            MARGIN - 4.0,
            ya.value_at(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(x_field)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_field)
    );
    if let Some(title) = &opts.title {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            MARGIN / 2.0,
            escape(title)
        );
    }
    if opts.reference_line {
        let (lo, hi) = (xa.value_at(0.0), xa.value_at(1.0));
        {
            let _ = writeln!(
                s,
                r#"<line class="reference" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="red"/>"#,
                px(lo),
                py(lo),
                px(hi),
                py(hi)
            );
        }
    }
    for (x, y) in &points {
        let _ = writeln!(
            s,
            r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="2.5" fill="none" stroke="steelblue"/>"#,
            px(*x),
            py(*y)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg_scatter(
    records: &[TrialRecord],
    x_field: &str,
    y_field: &str,
    path: impl AsRef<Path>,
    opts: &ScatterOptions,
) -> Result<()> {
    fs::write(path, render_scatter(records, x_field, y_field, opts)?)?;
    Ok(())
}

/// The standard plot set of an experiment run: bound-vs-error for each of
/// the six outputs, basic-vs-shifted log-sum-exp error, and softmax sum
/// deviations by trial.
pub const STANDARD_PLOTS: [(&str, &str, &str, bool); 10] = [
    ("lse_basic", "bnd_lse_basic", "err_lse_basic", true),
    ("lse_shift", "bnd_lse_shift", "err_lse_shift", true),
    ("lse_basic_vs_shift", "err_lse_basic", "err_lse_shift", true),
    ("sm_basic", "bnd_sm_basic", "err_sm_basic", true),
    ("sm_shift", "bnd_sm_shift", "err_sm_shift", true),
    ("sm_alt", "bnd_sm_alt", "err_sm_alt", true),
    ("sm_altshift", "bnd_sm_altshift", "err_sm_altshift", true),
    ("sum_dev_basic", "trial_id", "sum_dev_basic", false),
    ("sum_dev_shift", "trial_id", "sum_dev_shift", false),
    ("sum_dev_alt", "trial_id", "sum_dev_alt", false),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::data::{generate, DataSpec, Generator};
    use crate::harness::experiment::run_experiment;
    use crate::precision::FloatFormat;

    #[test]
    fn one_marker_per_record_and_reference_line() {
        let spec = DataSpec::new(Generator::Uniform { lo: -5.0, hi: 5.0 }, 6, 25, 1);
        let recs = run_experiment(&generate(&spec, None).unwrap(), &FloatFormat::fp16()).unwrap();
        let opts = ScatterOptions {
            reference_line: true,
            ..Default::default()
        };
        let svg = render_scatter(&recs, "bnd_lse_shift", "err_lse_shift", &opts).unwrap();
        assert_eq!(svg.matches("class=\"marker\"").count(), 25);
        assert_eq!(svg.matches("class=\"reference\"").count(), 1);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn log_axes_drop_nonpositive_points() {
        let spec = DataSpec::new(Generator::Constant { c: 0.0 }, 4, 3, 1);
        let recs = run_experiment(&generate(&spec, None).unwrap(), &FloatFormat::fp16()).unwrap();
        let opts = ScatterOptions {
            log_axes: true,
            ..Default::default()
        };
        // zero errors cannot be placed on a log axis
        let svg = render_scatter(&recs, "bnd_sm_shift", "err_sm_shift", &opts).unwrap();
        assert_eq!(svg.matches("class=\"marker\"").count(), 0);
        assert!(render_scatter(&recs, "nope", "err_sm_shift", &opts).is_err());
    }
}
