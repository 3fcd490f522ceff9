//! Deterministic SVG rendering of heaviness trees.
//!
//! Every branch is a rectangle: thickness proportional to probability,
//! length equal to surprise in the tree's unit. Leaves are green; after
//! grouping, trunks are blue and stems red. Identical input and options
//! produce byte-identical output.

use crate::treeviz::HeavinessTree;

const LEAF_COLOR: &str = "#2e8b57";
const TRUNK_COLOR: &str = "#1f77b4";
const STEM_COLOR: &str = "#d62728";

/// Which way the branches point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Branches grow rightward from the left edge.
    #[default]
    Horizontal,
    /// Branches grow upward from the bottom edge.
    Vertical,
}

#[derive(Debug, Clone)]
pub struct SvgOptions {
    pub orientation: Orientation,
    /// Pixels per unit of surprise (branch length scale).
    pub px_per_unit: f64,
    /// Pixels per unit of probability (branch thickness scale).
    pub px_per_prob: f64,
    /// Gap between sibling branches, in pixels.
    pub gap: f64,
    pub margin: f64,
    pub show_labels: bool,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            orientation: Orientation::Horizontal,
            px_per_unit: 120.0,
            px_per_prob: 240.0,
            gap: 4.0,
            margin: 10.0,
            show_labels: true,
        }
    }
}

struct Rect {
    along: f64,  // offset across the probability axis
    start: f64,  // offset along the length axis
    length: f64, // extent along the length axis
    thick: f64,  // extent across the probability axis
    color: &'static str,
    label: String,
}

fn fmt(x: f64) -> String {
    // fixed-precision keeps output byte-stable
    format!("{x:.4}")
}

/// Render a tree to SVG text.
pub fn render_svg(t: &HeavinessTree, options: &SvgOptions) -> String {
    let ppu = options.px_per_unit;
    let ppp = options.px_per_prob;
    let mut rects: Vec<Rect> = Vec::new();
    let mut cursor = 0.0;

    match &t.trunks {
        None => {
            for leaf in &t.leaves {
                let thick = leaf.prob.to_f64() * ppp;
                rects.push(Rect {
                    along: cursor,
                    start: 0.0,
                    length: leaf.depth * ppu,
                    thick,
                    color: LEAF_COLOR,
                    label: leaf.label.clone(),
                });
                cursor += thick + options.gap;
            }
        }
        Some(trunks) => {
            for trunk in trunks {
                let trunk_thick = trunk.prob.to_f64() * ppp;
                let trunk_len = trunk.length * ppu;
                rects.push(Rect {
                    along: cursor,
                    start: 0.0,
                    length: trunk_len,
                    thick: trunk_thick,
                    color: TRUNK_COLOR,
                    label: trunk.label.clone(),
                });
                // stems partition the trunk's thickness exactly
                let mut stem_cursor = cursor;
                for stem in &trunk.stems {
                    let thick = stem.width.to_f64() * ppp;
                    rects.push(Rect {
                        along: stem_cursor,
                        start: trunk_len,
                        length: stem.length * ppu,
                        thick,
                        color: STEM_COLOR,
                        label: stem.leaf_label.clone(),
                    });
                    stem_cursor += thick;
                }
                cursor += trunk_thick + options.gap;
            }
        }
    }

    let across = (cursor - options.gap).max(0.0);
    let max_len = rects
        .iter()
        .map(|r| r.start + r.length)
        .fold(0.0f64, f64::max);
    let (width, height) = match options.orientation {
        Orientation::Horizontal => (max_len + 2.0 * options.margin, across + 2.0 * options.margin),
        Orientation::Vertical => (across + 2.0 * options.margin, max_len + 2.0 * options.margin),
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\">\n",
        fmt(width),
        fmt(height),
        fmt(width),
        fmt(height)
    ));
    for r in &rects {
        let (x, y, w, h) = match options.orientation {
            Orientation::Horizontal => (
                options.margin + r.start,
                options.margin + r.along,
                r.length,
                r.thick,
            ),
            Orientation::Vertical => (
                options.margin + r.along,
                options.margin + (max_len - r.start - r.length),
                r.thick,
                r.length,
            ),
        };
        out.push_str(&format!(
            "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
            fmt(x),
            fmt(y),
            fmt(w),
            fmt(h),
            r.color
        ));
        if options.show_labels && r.thick > 8.0 {
            let (tx, ty) = match options.orientation {
                Orientation::Horizontal => (x + 2.0, y + r.thick / 2.0 + 3.0),
                Orientation::Vertical => (x + 2.0, y + r.length - 4.0),
            };
            out.push_str(&format!(
                "  <text x=\"{}\" y=\"{}\" font-size=\"9\" fill=\"#ffffff\">{}</text>\n",
                fmt(tx),
                fmt(ty),
                xml_escape(&r.label)
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
