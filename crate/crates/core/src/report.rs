//! File exports: factor CSV/SVG, map grids, stability CSVs, DOT graphs
//! and the fickleness/distance report.
//!
//! Every export is a pure function from values to a `String`, emitted
//! with fixed float formatting so identical inputs produce identical
//! bytes. SVG files are hand-written: markers live inside a
//! `scale(1,-1)` group so their `cx`/`cy` attributes carry the model
//! coordinates unchanged (the viewBox does the scaling), which keeps the
//! files easy to check mechanically.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::cliquegraph::NeighborGraph;
use crate::contingency::CorpusStats;
use crate::error::{Error, Result};
use crate::fca::{CloudAxis, FactorModel, ItemKind};
use crate::stability::{classify_pair, CriticalBounds, MapLayout, StabilityMatrix};

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Factor coordinates as CSV: `label,kind,factor_1..factor_r`.
pub fn factors_csv(model: &FactorModel) -> String {
    let mut out = String::from("label,kind");
    for k in 1..=model.rank() {
        let _ = write!(out, ",factor_{k}");
    }
    out.push('\n');
    for (i, label) in model.row_labels().iter().enumerate() {
        out.push_str(label);
        out.push_str(",word");
        for c in &model.row_coords()[i] {
            let _ = write!(out, ",{c:.12}");
        }
        out.push('\n');
    }
    for (j, label) in model.col_labels().iter().enumerate() {
        out.push_str(label);
        out.push_str(",text");
        for c in &model.col_coords()[j] {
            let _ = write!(out, ",{c:.12}");
        }
        out.push('\n');
    }
    out
}

/// Per-document corpus statistics as CSV.
pub fn corpus_stats_csv(stats: &CorpusStats) -> String {
    let mut out = String::from("document,occurrences,distinct_words,hapax\n");
    for d in &stats.documents {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            d.label, d.occurrences, d.distinct_words, d.hapax
        );
    }
    out
}

struct SvgFrame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl SvgFrame {
    fn around(points: impl Iterator<Item = (f64, f64)>) -> SvgFrame {
        let mut x_min = 0.0f64;
        let mut x_max = 0.0f64;
        let mut y_min = 0.0f64;
        let mut y_max = 0.0f64;
        for (x, y) in points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
        let pad_x = 0.08 * (x_max - x_min).max(1e-9);
        let pad_y = 0.08 * (y_max - y_min).max(1e-9);
        SvgFrame {
            x_min: x_min - pad_x,
            x_max: x_max + pad_x,
            y_min: y_min - pad_y,
            y_max: y_max + pad_y,
        }
    }

    fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    fn marker_radius(&self) -> f64 {
        0.008 * self.width().max(self.height())
    }

    fn font_size(&self) -> f64 {
        0.018 * self.width().max(self.height())
    }

    fn open(&self, out: &mut String, title: &str) {
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" \
             viewBox=\"{:.6} {:.6} {:.6} {:.6}\">",
            self.x_min,
            -self.y_max,
            self.width(),
            self.height()
        );
        let _ = writeln!(out, "<title>{}</title>", xml_escape(title));
        // Axes through the origin, drawn in plot coordinates.
        let stroke = 0.15 * self.marker_radius();
        let _ = writeln!(
            out,
            "<g transform=\"scale(1,-1)\" stroke=\"#999999\" stroke-width=\"{:.6}\">",
            stroke
        );
        let _ = writeln!(
            out,
            "<line x1=\"{:.6}\" y1=\"0\" x2=\"{:.6}\" y2=\"0\"/>",
            self.x_min, self.x_max
        );
        let _ = writeln!(
            out,
            "<line x1=\"0\" y1=\"{:.6}\" x2=\"0\" y2=\"{:.6}\"/>",
            self.y_min, self.y_max
        );
        let _ = writeln!(out, "</g>");
    }
}

/// Scatter of the row and column clouds on a factor plane. Text items
/// are framed; fickle words are filled, stable words hollow.
pub fn export_factors_svg(
    model: &FactorModel,
    axes: (usize, usize),
    fickle: &BTreeSet<String>,
) -> Result<String> {
    let mut out = String::new();
    let shares = model.inertia_shares();
    if model.rank() == 0 {
        // Independence-level tables have no plane to draw.
        let frame = SvgFrame::around(std::iter::empty());
        frame.open(&mut out, "factor plane (no non-trivial factors)");
        out.push_str("</svg>\n");
        return Ok(out);
    }
    let points = model.project(axes)?;
    let frame = SvgFrame::around(points.iter().map(|p| (p.x, p.y)));
    let title = format!(
        "factors {} ({:.2}%) and {} ({:.2}%)",
        axes.0 + 1,
        100.0 * shares[axes.0],
        axes.1 + 1,
        100.0 * shares[axes.1]
    );
    frame.open(&mut out, &title);
    let r = frame.marker_radius();
    let stroke = 0.3 * r;
    let font = frame.font_size();

    let _ = writeln!(
        out,
        "<g transform=\"scale(1,-1)\" stroke=\"black\" stroke-width=\"{stroke:.6}\">"
    );
    for p in points.iter().filter(|p| p.kind == ItemKind::Word) {
        let fill = if fickle.contains(&p.label) {
            "black"
        } else {
            "none"
        };
        let _ = writeln!(
            out,
            "<circle class=\"word\" data-label=\"{}\" cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\" fill=\"{}\"/>",
            xml_escape(&p.label),
            p.x,
            p.y,
            r,
            fill
        );
    }
    let _ = writeln!(out, "</g>");

    // Labels are drawn outside the flipped group so the glyphs stay
    // upright; y is negated by hand.
    for p in &points {
        match p.kind {
            ItemKind::Text => {
                let w = font * 0.62 * (p.label.chars().count() as f64 + 1.0);
                let _ = writeln!(
                    out,
                    "<rect class=\"text-frame\" data-label=\"{}\" x=\"{:.6}\" y=\"{:.6}\" \
                     width=\"{:.6}\" height=\"{:.6}\" fill=\"white\" stroke=\"black\" \
                     stroke-width=\"{:.6}\"/>",
                    xml_escape(&p.label),
                    p.x - w / 2.0,
                    -p.y - 0.75 * font,
                    w,
                    1.5 * font,
                    stroke
                );
                let _ = writeln!(
                    out,
                    "<text x=\"{:.6}\" y=\"{:.6}\" font-size=\"{:.6}\" text-anchor=\"middle\">{}</text>",
                    p.x,
                    -p.y + 0.4 * font,
                    font,
                    xml_escape(&p.label)
                );
            }
            ItemKind::Word => {
                if fickle.contains(&p.label) {
                    let _ = writeln!(
                        out,
                        "<text x=\"{:.6}\" y=\"{:.6}\" font-size=\"{:.6}\" text-anchor=\"middle\">{}</text>",
                        p.x,
                        -p.y - 1.4 * r,
                        0.8 * font,
                        xml_escape(&p.label)
                    );
                }
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Output of the fickleness-vs-distance report.
#[derive(Debug, Clone)]
pub struct FickleDistanceReport {
    pub csv: String,
    pub svg: String,
    /// Pearson correlation between fickle-pair counts and squared
    /// distances; NaN when undefined.
    pub correlation: f64,
    /// Explanation when the correlation is undefined.
    pub note: Option<String>,
}

fn pearson(xs: &[f64], ys: &[f64]) -> (f64, Option<String>) {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return (
            f64::NAN,
            Some("correlation undefined: fewer than two points".to_string()),
        );
    }
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        syy += (y - mean_y) * (y - mean_y);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 || syy == 0.0 {
        let which = if sxx == 0.0 {
            "fickle-pair counts"
        } else {
            "distances"
        };
        return (
            f64::NAN,
            Some(format!("correlation undefined: zero variance in {which}")),
        );
    }
    (sxy / (sxx * syy).sqrt(), None)
}

/// Per-word fickle-pair count against squared distance to the origin of
/// the factor space, as CSV and scatter, with their sample correlation.
pub fn fickleness_distance_report(
    model: &FactorModel,
    counts: &BTreeMap<String, usize>,
) -> Result<FickleDistanceReport> {
    for label in model.row_labels() {
        if !counts.contains_key(label) {
            return Err(Error::ItemSetMismatch {
                reason: format!("no fickleness count for word {label:?}"),
            });
        }
    }
    let distances = model.center_distances(CloudAxis::Rows);
    let mut csv = String::from("label,fickle_pairs,distance_sq\n");
    let mut xs = Vec::with_capacity(model.row_labels().len());
    let mut ys = Vec::with_capacity(model.row_labels().len());
    for (i, label) in model.row_labels().iter().enumerate() {
        let count = counts[label];
        let _ = writeln!(csv, "{label},{count},{:.12}", distances[i]);
        xs.push(count as f64);
        ys.push(distances[i]);
    }
    let (correlation, note) = pearson(&xs, &ys);

    let mut svg = String::new();
    let frame = SvgFrame::around(xs.iter().copied().zip(ys.iter().copied()));
    let title = match &note {
        Some(note) => format!("fickleness vs distance ({note})"),
        None => format!("fickleness vs distance (r = {correlation:.4})"),
    };
    frame.open(&mut svg, &title);
    let r = frame.marker_radius();
    let _ = writeln!(
        svg,
        "<g transform=\"scale(1,-1)\" stroke=\"black\" stroke-width=\"{:.6}\" fill=\"none\">",
        0.3 * r
    );
    for (i, label) in model.row_labels().iter().enumerate() {
        let _ = writeln!(
            svg,
            "<circle class=\"word\" data-label=\"{}\" cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\"/>",
            xml_escape(label),
            xs[i],
            ys[i],
            r
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        "<text x=\"{:.6}\" y=\"{:.6}\" font-size=\"{:.6}\">{}</text>",
        frame.x_min + 0.02 * frame.width(),
        -(frame.y_max - 0.04 * frame.height()),
        frame.font_size(),
        xml_escape(&title)
    );
    svg.push_str("</svg>\n");

    Ok(FickleDistanceReport {
        csv,
        svg,
        correlation,
        note,
    })
}

fn render_item(item: &crate::stability::MapItem) -> String {
    let base = match item.kind {
        ItemKind::Word => item.label.clone(),
        ItemKind::Text => item.label.to_uppercase(),
    };
    if item.fickle {
        format!("[{base}]")
    } else {
        base
    }
}

/// Plain-text grid of the map: one row of cells per grid row, labels
/// comma-separated inside a cell, text items uppercased, fickle items
/// bracketed.
pub fn export_map_text(layout: &MapLayout) -> String {
    let g = layout.geometry;
    let cell_text: Vec<String> = layout
        .cells
        .iter()
        .map(|items| items.iter().map(render_item).collect::<Vec<_>>().join(", "))
        .collect();
    let mut col_width = vec![0usize; g.width()];
    for y in 0..g.height() {
        for x in 0..g.width() {
            col_width[x] = col_width[x].max(cell_text[g.unit_at(x, y)].chars().count());
        }
    }
    let mut out = String::new();
    for y in 0..g.height() {
        let mut line = String::new();
        for x in 0..g.width() {
            if x > 0 {
                line.push_str(" | ");
            }
            let text = &cell_text[g.unit_at(x, y)];
            line.push_str(text);
            for _ in text.chars().count()..col_width[x] {
                line.push(' ');
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// JSON twin of the text grid with explicit unit coordinates.
pub fn export_map_json(layout: &MapLayout) -> String {
    #[derive(serde::Serialize)]
    struct Cell<'a> {
        unit: usize,
        x: usize,
        y: usize,
        items: &'a [crate::stability::MapItem],
    }
    #[derive(serde::Serialize)]
    struct Repr<'a> {
        width: usize,
        height: usize,
        cells: Vec<Cell<'a>>,
    }
    let g = layout.geometry;
    let repr = Repr {
        width: g.width(),
        height: g.height(),
        cells: layout
            .cells
            .iter()
            .enumerate()
            .map(|(unit, items)| {
                let (x, y) = g.coords(unit);
                Cell { unit, x, y, items }
            })
            .collect(),
    };
    serde_json::to_string_pretty(&repr).expect("map serialization cannot fail")
}

/// Pair classification CSV: `item_a,item_b,M,class` for every unordered
/// pair in item order.
pub fn pair_classes_csv(m: &StabilityMatrix, bounds: &CriticalBounds) -> String {
    let mut out = String::from("item_a,item_b,M,class\n");
    for p in 0..m.n_items() {
        for q in (p + 1)..m.n_items() {
            let value = m.value(p, q);
            let _ = writeln!(
                out,
                "{},{},{:.6},{}",
                m.labels()[p],
                m.labels()[q],
                value,
                classify_pair(value, bounds)
            );
        }
    }
    out
}

/// DOT serialization of the neighbor graph. Vertices keep the graph
/// order and carry a `fickle` attribute; edges carry the stability
/// index as `weight`.
pub fn export_dot(g: &NeighborGraph, fickle: &BTreeSet<String>) -> String {
    let mut out = String::from("graph neighborhood {\n");
    for label in g.labels() {
        let _ = writeln!(
            out,
            "  \"{}\" [fickle={}];",
            dot_escape(label),
            fickle.contains(label)
        );
    }
    for (p, q) in g.edges() {
        let _ = writeln!(
            out,
            "  \"{}\" -- \"{}\" [weight={:.6}];",
            dot_escape(&g.labels()[p]),
            dot_escape(&g.labels()[q]),
            g.weight(p, q)
        );
    }
    out.push_str("}\n");
    out
}
