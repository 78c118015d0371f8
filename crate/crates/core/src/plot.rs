//! Static SVG charts of cost curves against horizontal budget guidelines.
//!
//! Output is a self-contained SVG 1.1 document. Every coordinate is printed
//! with fixed precision, so identical input yields identical bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{CommunityTable, Field};
use crate::frontier::{self, BudgetConstraint, TotalCostCurve, Window, GRID_STEP_KM, GUIDELINES};
use crate::regress;
use crate::{Error, Result, Year};

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Horizontal reference line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Guide {
    pub label: String,
    pub y: f64,
}

/// Labelled marker, typically a computed boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub x: f64,
    pub y: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub guides: Vec<Guide>,
    pub annotations: Vec<Annotation>,
}

struct Axis {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>) -> Axis {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if lo == hi {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
            lo -= pad;
            hi += pad;
        }
        let step = nice_step((hi - lo) / 6.0);
        Axis {
            lo: (lo / step).floor() * step,
            hi: (hi / step).ceil() * step,
            step,
        }
    }

    fn ticks(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step).round() as usize;
        (0..=count).map(|i| self.lo + i as f64 * self.step).collect()
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

fn nice_step(raw: f64) -> f64 {
    let exp = raw.log10().floor();
    let base = 10f64.powf(exp);
    let frac = raw / base;
    let nice = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * base
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64, step: f64) -> String {
    if step >= 1.0 {
        format!("{v:.0}")
    } else {
        let decimals = (-step.log10().floor()) as usize;
        format!("{v:.decimals$}")
    }
}

/// Renders the plot to an SVG document.
pub fn render_plot(spec: &PlotSpec) -> Result<String> {
    if spec.series.is_empty() || spec.series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::Domain("plot needs at least one non-empty series".into()));
    }
    let all_points = spec.series.iter().flat_map(|s| s.points.iter().copied());
    let finite = all_points.clone().all(|(x, y)| x.is_finite() && y.is_finite())
        && spec.guides.iter().all(|g| g.y.is_finite())
        && spec.annotations.iter().all(|a| a.x.is_finite() && a.y.is_finite());
    if !finite {
        return Err(Error::Domain("plot values must be finite".into()));
    }

    let x_axis = Axis::fit(all_points.clone().map(|p| p.0).chain(spec.annotations.iter().map(|a| a.x)));
    let y_axis = Axis::fit(
        all_points
            .map(|p| p.1)
            .chain(spec.guides.iter().map(|g| g.y))
            .chain(spec.annotations.iter().map(|a| a.y)),
    );
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let px = |x: f64| x_axis.map(x, x0, x1);
    let py = |y: f64| y_axis.map(y, y0, y1);

    let mut svg = String::new();
    let w = &mut svg;
    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#).ok();
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}" font-family="sans-serif" font-size="11">"#
    )
    .ok();
    writeln!(w, r#"<rect x="0" y="0" width="{WIDTH:.0}" height="{HEIGHT:.0}" fill="white"/>"#).ok();
    writeln!(
        w,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (x0 + x1) / 2.0,
        escape(&spec.title)
    )
    .ok();

    // grid and ticks
    writeln!(w, r##"<g stroke="#e0e0e0" stroke-width="1">"##).ok();
    for t in x_axis.ticks() {
        writeln!(w, r#"<line x1="{:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y1:.2}"/>"#, px(t), px(t)).ok();
    }
    for t in y_axis.ticks() {
        writeln!(w, r#"<line x1="{x0:.2}" y1="{:.2}" x2="{x1:.2}" y2="{:.2}"/>"#, py(t), py(t)).ok();
    }
    writeln!(w, "</g>").ok();
    writeln!(
        w,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    )
    .ok();
    for t in x_axis.ticks() {
        writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(t),
            y0 + 16.0,
            tick_label(t, x_axis.step)
        )
        .ok();
    }
    for t in y_axis.ticks() {
        writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            py(t) + 4.0,
            tick_label(t, y_axis.step)
        )
        .ok();
    }
    writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(&spec.x_label)
    )
    .ok();
    writeln!(
        w,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&spec.y_label)
    )
    .ok();

    for g in &spec.guides {
        let y = py(g.y);
        writeln!(
            w,
            r##"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#555555" stroke-dasharray="6 4"/>"##
        )
        .ok();
        writeln!(w, r##"<text x="{:.2}" y="{:.2}" fill="#555555">{}</text>"##, x1 + 4.0, y + 4.0, escape(&g.label)).ok();
    }

    for (i, s) in spec.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        match s.points.as_slice() {
            [] => {}
            [(x, y)] => {
                writeln!(w, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#, px(*x), py(*y)).ok();
            }
            pts => {
                let path: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
                writeln!(
                    w,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                    path.join(" ")
                )
                .ok();
            }
        }
        let ly = TOP + 10.0 + 16.0 * i as f64;
        writeln!(
            w,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            x1 + 90.0,
            x1 + 110.0
        )
        .ok();
        writeln!(w, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x1 + 114.0, ly + 4.0, escape(&s.name)).ok();
    }

    for a in &spec.annotations {
        let (x, y) = (px(a.x), py(a.y));
        writeln!(w, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="none" stroke="black"/>"#).ok();
        writeln!(w, r#"<text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#, x + 5.0, y - 5.0, escape(&a.label)).ok();
    }
    writeln!(w, "</svg>").ok();
    Ok(svg)
}

/// The plotted series as `series,x,y` CSV rows.
pub fn series_csv(spec: &PlotSpec) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["series", "x", "y"]).expect("in-memory write");
    for s in &spec.series {
        for (x, y) in &s.points {
            w.write_record([s.name.clone(), x.to_string(), y.to_string()])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn grid(window: Window) -> Vec<f64> {
    let steps = ((window.hi - window.lo) / GRID_STEP_KM).round() as usize;
    (0..=steps).map(|i| window.lo + i as f64 * GRID_STEP_KM).collect()
}

/// Shelter, driving and total cost curves per year with budget guidelines for
/// one income; total-cost boundaries at each guideline are annotated.
pub fn cost_curves_figure(curves: &[TotalCostCurve], income_annual: f64, window: Window) -> Result<PlotSpec> {
    let xs = grid(window);
    let mut series = Vec::new();
    for c in curves {
        let drive: Vec<(f64, f64)> = xs.iter().map(|&d| Ok((d, c.drive_at(d)?))).collect::<Result<_>>()?;
        let total: Vec<(f64, f64)> = xs
            .iter()
            .map(|&d| Ok((d, frontier::total_cost(c, d)?.value)))
            .collect::<Result<_>>()?;
        series.push(Series {
            name: format!("{} shelter", c.label),
            points: xs.iter().map(|&d| (d, c.shelter_at(d))).collect(),
        });
        series.push(Series {
            name: format!("{} driving", c.label),
            points: drive,
        });
        series.push(Series {
            name: format!("{} total", c.label),
            points: total,
        });
    }
    let mut guides = Vec::new();
    let mut annotations = Vec::new();
    for &(p, name) in &GUIDELINES {
        let budget = BudgetConstraint::new(p, income_annual)?;
        guides.push(Guide {
            label: format!("{name} (${})", frontier::thousands(budget.level())),
            y: budget.level(),
        });
        for c in curves {
            let zone = frontier::feasibility_zone(c, &budget, window)?;
            if let Some(b) = zone.d2.filter(|b| b.crossed == frontier::Crossed::Total) {
                annotations.push(Annotation {
                    x: b.km,
                    y: budget.level(),
                    label: format!("{} d2 {:.0} km", c.label, b.km),
                });
            }
            if let Some(b) = zone.d1 {
                annotations.push(Annotation {
                    x: b.km,
                    y: budget.level(),
                    label: format!("{} d1 {:.0} km", c.label, b.km),
                });
            }
        }
    }
    Ok(PlotSpec {
        title: format!(
            "Shelter, driving and budget guideline curves (income ${})",
            frontier::thousands(income_annual)
        ),
        x_label: "Distance from core (km)".into(),
        y_label: "Monthly cost ($)".into(),
        series,
        guides,
        annotations,
    })
}

/// Fitted shelter-plus-driving share of income per year, with percentage
/// guidelines; crossings of each curve with each guideline are annotated.
pub fn percent_curves_figure(table: &CommunityTable, years: &[Year], degree: usize, window: Window) -> Result<PlotSpec> {
    let xs = grid(window);
    let mut series = Vec::new();
    let mut models = Vec::new();
    for &y in years {
        let model = regress::fit_pairs(&table.against_distance(Field::Pct(y)), degree)?;
        series.push(Series {
            name: format!("{y} shelter + driving %"),
            points: xs.iter().map(|&d| (d, model.eval(d))).collect(),
        });
        models.push((y, model));
    }
    let mut guides = Vec::new();
    let mut annotations = Vec::new();
    for &(p, name) in &GUIDELINES {
        let level = 100.0 * p;
        guides.push(Guide {
            label: name.to_string(),
            y: level,
        });
        for (y, m) in &models {
            for d in frontier::crossings(|d| m.eval(d), level, window.lo, window.hi, GRID_STEP_KM)? {
                annotations.push(Annotation {
                    x: d,
                    y: level,
                    label: format!("{y} {:.0} km", d),
                });
            }
        }
    }
    Ok(PlotSpec {
        title: "Budget guidelines versus shelter + driving share of income".into(),
        x_label: "Distance from core (km)".into(),
        y_label: "Percent of after-tax income".into(),
        series,
        guides,
        annotations,
    })
}
