//! Plain-text numeric tables for heaviness trees: per-branch probability,
//! surprise and heaviness with entropy totals, and trunk/stem subtotals for
//! grouped trees.

use crate::infomath::LogUnit;
use crate::treeviz::HeavinessTree;

fn unit_name(unit: LogUnit) -> &'static str {
    match unit {
        LogUnit::Nat => "nat",
        LogUnit::Bit => "bit",
    }
}

fn align(rows: &[Vec<String>]) -> String {
    if rows.is_empty() {
        return String::new();
    }
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(String::len).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if c == 0 {
                    format!("{cell:<width$}", width = widths[c])
                } else {
                    format!("{cell:>width$}", width = widths[c])
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Render a tree as an aligned ASCII table in the requested unit.
///
/// Lengths stored in the tree's own unit are rescaled exactly (the two units
/// differ by a constant factor).
pub fn render_table(t: &HeavinessTree, unit: LogUnit) -> String {
    let convert = |value: f64| unit.from_nats(t.unit.to_nats(value));
    let num = |value: f64| format!("{:.6}", convert(value));
    let name = unit_name(unit);

    match &t.trunks {
        None => {
            let mut rows = vec![vec![
                "outcome".to_string(),
                "prob".to_string(),
                format!("surprise({name})"),
                format!("heaviness({name})"),
            ]];
            for leaf in &t.leaves {
                rows.push(vec![
                    leaf.label.clone(),
                    leaf.prob.to_string(),
                    num(leaf.depth),
                    num(leaf.prob.to_f64() * leaf.depth),
                ]);
            }
            rows.push(vec![
                "total".to_string(),
                "1".to_string(),
                String::new(),
                num(t.leaf_area()),
            ]);
            align(&rows)
        }
        Some(trunks) => {
            let mut out = String::new();
            let mut rows = vec![vec![
                "state".to_string(),
                "prob".to_string(),
                format!("surprise({name})"),
                format!("heaviness({name})"),
            ]];
            for trunk in trunks {
                rows.push(vec![
                    trunk.label.clone(),
                    trunk.prob.to_string(),
                    num(trunk.length),
                    num(trunk.prob.to_f64() * trunk.length),
                ]);
            }
            rows.push(vec![
                "H(C)".to_string(),
                "1".to_string(),
                String::new(),
                num(t.trunk_area()),
            ]);
            out.push_str("trunks (computational states)\n");
            out.push_str(&align(&rows));

            let mut rows = vec![vec![
                "outcome".to_string(),
                "state".to_string(),
                "prob".to_string(),
                "cond".to_string(),
                format!("surprise({name})"),
                format!("heaviness({name})"),
            ]];
            for trunk in trunks {
                for stem in &trunk.stems {
                    rows.push(vec![
                        stem.leaf_label.clone(),
                        trunk.label.clone(),
                        stem.width.to_string(),
                        stem.conditional.to_string(),
                        num(stem.length),
                        num(stem.width.to_f64() * stem.length),
                    ]);
                }
            }
            rows.push(vec![
                "S(Phi|C)".to_string(),
                String::new(),
                "1".to_string(),
                String::new(),
                String::new(),
                num(t.stem_area()),
            ]);
            out.push_str("\nstems (microstates within computational states)\n");
            out.push_str(&align(&rows));
            out.push_str(&format!(
                "\ntotal S(Phi) = {} {name}\n",
                num(t.total_area())
            ));
            out
        }
    }
}
