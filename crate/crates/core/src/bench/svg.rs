use std::fmt::Write;

use super::{Aggregate, Method};
use crate::model::SolutionSequence;
use crate::terrain::Terrain;

const PALETTE: [&str; 7] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1",
];

/// Top view: footholds, goal line, COG path and the final stance.
pub fn overhead_svg(terrain: &Terrain, seq: &SolutionSequence) -> String {
    let b = terrain.bounds();
    let scale = 80.0;
    let pad = 10.0;
    let w = (b.x_max - b.x_min) * scale + 2.0 * pad;
    let h = (b.y_max - b.y_min) * scale + 2.0 * pad;
    let px = |x: f64| pad + (x - b.x_min) * scale;
    // SVG y grows downwards.
    let py = |y: f64| pad + (b.y_max - y) * scale;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.1} {h:.1}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for f in terrain.footholds() {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.1}" cy="{:.1}" r="2" fill="#999"/>"##,
            px(f.x),
            py(f.y)
        );
    }
    let gx = px(terrain.goal_x());
    let _ = writeln!(
        s,
        r##"<line x1="{gx:.1}" y1="0" x2="{gx:.1}" y2="{h:.1}" stroke="#59a14f" stroke-dasharray="6 4"/>"##
    );
    let path: Vec<String> = seq
        .states
        .iter()
        .map(|st| format!("{:.1},{:.1}", px(st.cog.x), py(st.cog.y)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#e15759" stroke-width="2"/>"##,
        path.join(" ")
    );
    let last = seq.last();
    let grounded: Vec<String> = last
        .feet
        .iter()
        .flatten()
        .map(|f| format!("{:.1},{:.1}", px(f.x), py(f.y)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polygon points="{}" fill="#4e79a7" fill-opacity="0.2" stroke="#4e79a7"/>"##,
        grounded.join(" ")
    );
    for f in last.feet.iter().flatten() {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.1}" cy="{:.1}" r="4" fill="#4e79a7"/>"##,
            px(f.x),
            py(f.y)
        );
    }
    let _ = writeln!(
        s,
        r##"<circle cx="{:.1}" cy="{:.1}" r="4" fill="#e15759"/>"##,
        px(last.cog.x),
        py(last.cog.y)
    );
    s.push_str("</svg>\n");
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartMetric {
    /// Mean advance with one-standard-deviation whiskers.
    Advance,
    StepLength,
    /// Mean per-step planning time on a log axis.
    StepTime,
}

impl ChartMetric {
    pub fn title(self) -> &'static str {
        match self {
            ChartMetric::Advance => "advance distance (m)",
            ChartMetric::StepLength => "mean step length (m)",
            ChartMetric::StepTime => "planning time per step (s, log)",
        }
    }

    fn value(self, a: &Aggregate) -> f64 {
        match self {
            ChartMetric::Advance => a.mean_advance_m,
            ChartMetric::StepLength => a.mean_step_m,
            ChartMetric::StepTime => a.mean_step_time_s,
        }
    }
}

/// Grouped bars: one group per density, one bar per method.
pub fn bar_chart_svg(aggs: &[Aggregate], metric: ChartMetric) -> String {
    let mut densities: Vec<usize> = aggs.iter().map(|a| a.density).collect();
    densities.dedup();
    let mut methods: Vec<Method> = aggs.iter().map(|a| a.method).collect();
    methods.sort();
    methods.dedup();

    let (left, top, plot_h, bar_w, gap) = (60.0, 30.0, 300.0, 14.0, 30.0);
    let group_w = bar_w * methods.len() as f64 + gap;
    let legend_h = 16.0 * methods.len() as f64;
    let w = left + group_w * densities.len() as f64 + 20.0;
    let h = top + plot_h + 40.0 + legend_h;

    let log = metric == ChartMetric::StepTime;
    let tf = |v: f64| if log { v.max(1e-9).log10() } else { v };
    let vals: Vec<f64> = aggs
        .iter()
        .map(|a| {
            tf(metric.value(a)
                + if metric == ChartMetric::Advance {
                    a.std_advance_m
                } else {
                    0.0
                })
        })
        .collect();
    let (lo, hi) = if log {
        let lo = aggs
            .iter()
            .map(|a| tf(metric.value(a)))
            .fold(f64::INFINITY, f64::min)
            .floor();
        let hi = vals.iter().copied().fold(lo + 1.0, f64::max).ceil();
        (lo.min(hi - 1.0), hi)
    } else {
        (0.0, vals.iter().copied().fold(1e-9, f64::max) * 1.1)
    };
    let ty = |v: f64| top + plot_h * (1.0 - (tf(v) - lo) / (hi - lo));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="18" font-size="13">{}</text>"#,
        metric.title()
    );
    let base = top + plot_h;
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{base}" stroke="black"/>"#
    );
    let ticks: Vec<f64> = if log {
        (lo as i32..=hi as i32).map(|e| 10f64.powi(e)).collect()
    } else {
        (0..=4).map(|i| hi * f64::from(i) / 4.0).collect()
    };
    for t in ticks {
        let y = ty(t);
        let label = if log {
            format!("1e{}", t.log10().round())
        } else {
            format!("{t:.2}")
        };
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{left}" y2="{y:.1}" stroke="black"/><text x="4" y="{:.1}">{label}</text>"#,
            left - 4.0,
            y + 4.0
        );
    }
    for (gi, d) in densities.iter().enumerate() {
        let gx = left + gap / 2.0 + gi as f64 * group_w;
        for (mi, m) in methods.iter().enumerate() {
            let Some(a) = aggs.iter().find(|a| a.density == *d && a.method == *m) else {
                continue;
            };
            let x = gx + mi as f64 * bar_w;
            let y = ty(metric.value(a)).min(base);
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="{}"/>"#,
                bar_w - 2.0,
                base - y,
                PALETTE[mi % PALETTE.len()]
            );
            if metric == ChartMetric::Advance && a.std_advance_m > 0.0 {
                let cx = x + (bar_w - 2.0) / 2.0;
                let y0 = ty((a.mean_advance_m - a.std_advance_m).max(0.0));
                let y1 = ty(a.mean_advance_m + a.std_advance_m);
                let _ = writeln!(
                    s,
                    r#"<line x1="{cx:.1}" y1="{y0:.1}" x2="{cx:.1}" y2="{y1:.1}" stroke="black"/>"#
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{d}</text>"#,
            gx + (group_w - gap) / 2.0 - 10.0,
            base + 16.0
        );
    }
    for (mi, m) in methods.iter().enumerate() {
        let y = base + 34.0 + 16.0 * mi as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{left}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{y:.1}">{m}</text>"#,
            y - 9.0,
            PALETTE[mi % PALETTE.len()],
            left + 14.0
        );
    }
    s.push_str("</svg>\n");
    s
}
