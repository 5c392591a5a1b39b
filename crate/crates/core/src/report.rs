//! Report rendering: CSV tables, JSON payloads, and the grouped-bar SVG
//! chart of per-category rank statistics.
//!
//! CSV fractions are rounded to two decimals to mirror the printed tables;
//! JSON carries full precision.

use serde::Serialize;

use crate::mask::CategoryTaxonomy;
use crate::metrics::{DatasetSaliencyScore, SaliencyScore, SegScores};
use crate::stats::{CaseStudy, CategoryDistribution, CooccurrenceMatrix};

fn f2(v: f64) -> String {
    if v.is_nan() {
        "".to_string()
    } else {
        format!("{:.2}", v)
    }
}

fn f3(v: f64) -> String {
    format!("{:.3}", v)
}

fn category_header(taxonomy: &CategoryTaxonomy) -> String {
    let mut s = String::from("categories");
    for name in taxonomy.names() {
        s.push(',');
        s.push_str(name);
    }
    s
}

/// Distribution table: categories as columns; rows overall, salient,
/// salient_alone, distrib, then rank-1..3 counts with fractions relative to
/// overall appearances.
pub fn distribution_csv(dist: &CategoryDistribution, taxonomy: &CategoryTaxonomy) -> String {
    let n = dist.num_categories().min(taxonomy.len());
    let mut out = String::new();
    out.push_str(&category_header(taxonomy));
    out.push('\n');
    let row = |label: &str, f: &dyn Fn(usize) -> String| {
        let mut s = String::from(label);
        for c in 0..n {
            s.push(',');
            s.push_str(&f(c));
        }
        s.push('\n');
        s
    };
    out.push_str(&row("overall", &|c| dist.per_category[c].overall.to_string()));
    out.push_str(&row("salient", &|c| dist.per_category[c].salient.to_string()));
    out.push_str(&row("salient_alone", &|c| {
        dist.per_category[c].salient_alone.to_string()
    }));
    out.push_str(&row("distrib", &|c| f2(dist.per_category[c].distrib())));
    for k in 1..=3 {
        out.push_str(&row(&format!("rank{}", k), &|c| {
            dist.per_category[c].rank_counts[k - 1].to_string()
        }));
        out.push_str(&row(&format!("rank{}_frac", k), &|c| {
            f2(dist.per_category[c].rank_frac_of_overall(k))
        }));
    }
    out
}

#[derive(Serialize)]
struct DistributionJsonRow<'a> {
    category: u8,
    name: &'a str,
    overall: usize,
    salient: usize,
    salient_alone: usize,
    distrib: f64,
    rank_counts: [usize; 3],
    rank_frac_of_salient: [f64; 3],
    rank_frac_of_overall: [f64; 3],
}

/// Full-precision JSON rows, carrying both rank-fraction normalizations.
pub fn distribution_json(dist: &CategoryDistribution, taxonomy: &CategoryTaxonomy) -> String {
    let n = dist.num_categories().min(taxonomy.len());
    let rows: Vec<DistributionJsonRow> = (0..n)
        .map(|c| {
            let counts = &dist.per_category[c];
            DistributionJsonRow {
                category: (c + 1) as u8,
                name: taxonomy.name((c + 1) as u8).unwrap_or("?"),
                overall: counts.overall,
                salient: counts.salient,
                salient_alone: counts.salient_alone,
                distrib: counts.distrib(),
                rank_counts: counts.rank_counts,
                rank_frac_of_salient: [1, 2, 3].map(|k| counts.rank_frac_of_salient(k)),
                rank_frac_of_overall: [1, 2, 3].map(|k| counts.rank_frac_of_overall(k)),
            }
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("rows serialize")
}

/// Co-occurrence counts as a square CSV matrix.
pub fn cooccurrence_counts_csv(m: &CooccurrenceMatrix, taxonomy: &CategoryTaxonomy) -> String {
    square_csv(m.num_categories(), taxonomy, &|a, b| {
        if a == b {
            "0".into()
        } else {
            m.count(a, b).to_string()
        }
    })
}

/// Precedence probabilities as a square CSV matrix; cells without
/// co-occurrence are left empty.
pub fn cooccurrence_precedence_csv(m: &CooccurrenceMatrix, taxonomy: &CategoryTaxonomy) -> String {
    square_csv(m.num_categories(), taxonomy, &|a, b| {
        if a == b {
            "".into()
        } else {
            f2(m.precedence(a, b))
        }
    })
}

fn square_csv(
    n: usize,
    taxonomy: &CategoryTaxonomy,
    cell: &dyn Fn(u8, u8) -> String,
) -> String {
    let n = n.min(taxonomy.len());
    let mut out = category_header(taxonomy);
    out.push('\n');
    for a in 1..=n as u8 {
        out.push_str(taxonomy.name(a).unwrap_or("?"));
        for b in 1..=n as u8 {
            out.push(',');
            out.push_str(&cell(a, b));
        }
        out.push('\n');
    }
    out
}

/// Case-study table: co-occurrence counts and both precedence directions for
/// the focus category's top partners.
pub fn case_study_csv(cs: &CaseStudy, taxonomy: &CategoryTaxonomy) -> String {
    let focus_name = taxonomy.name(cs.focus).unwrap_or("?");
    let mut out = String::from("partner");
    for r in &cs.rows {
        out.push(',');
        out.push_str(taxonomy.name(r.category).unwrap_or("?"));
    }
    out.push('\n');
    out.push_str(&format!("salient_with_{}", focus_name));
    for r in &cs.rows {
        out.push(',');
        out.push_str(&r.cooccurrences.to_string());
    }
    out.push('\n');
    out.push_str(&format!("p_{}_higher", focus_name));
    for r in &cs.rows {
        out.push(',');
        out.push_str(&f2(r.p_focus_higher));
    }
    out.push('\n');
    out.push_str("p_partner_higher");
    for r in &cs.rows {
        out.push(',');
        out.push_str(&f2(r.p_other_higher));
    }
    out.push('\n');
    out
}

/// Segmentation score row: pixel accuracy, mean accuracy, mIoU.
pub fn seg_scores_csv(scores: &SegScores) -> String {
    format!(
        "pixel_acc,mean_acc,miou\n{},{},{}\n",
        f3(scores.pixel_acc),
        f3(scores.mean_acc),
        f3(scores.mean_iou)
    )
}

/// Per-class IoU row in taxonomy order plus the mean, mirroring the printed
/// per-category table.
pub fn per_class_iou_csv(scores: &SegScores, taxonomy: &CategoryTaxonomy) -> String {
    let mut header = String::from("method");
    let mut row = String::from("scores");
    for (i, name) in taxonomy.names().iter().enumerate() {
        header.push(',');
        header.push_str(name);
        row.push(',');
        let iou = scores.per_class_iou.get(i + 1).copied().flatten();
        row.push_str(&iou.map(f2).unwrap_or_default());
    }
    header.push_str(",miou");
    row.push(',');
    row.push_str(&f2(scores.mean_iou));
    format!("{}\n{}\n", header, row)
}

/// Saliency score row: max-F, AUC, MAE.
pub fn saliency_scores_csv(s: &SaliencyScore) -> String {
    format!(
        "f_measure,auc,mae\n{},{},{}\n",
        f3(s.f_measure_max),
        f3(s.auc),
        f3(s.mae)
    )
}

pub fn dataset_saliency_scores_csv(s: &DatasetSaliencyScore) -> String {
    format!(
        "f_measure,per_image_max_f,auc,mae,images,degenerate\n{},{},{},{},{},{}\n",
        f3(s.f_measure_max),
        f3(s.per_image_max_f),
        f3(s.auc),
        f3(s.mae),
        s.num_images,
        s.num_degenerate
    )
}

/// Loss trace as `step,loss` rows.
pub fn loss_trace_csv(trace: &[f64]) -> String {
    let mut out = String::from("step,loss\n");
    for (i, l) in trace.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i, l));
    }
    out
}

/// Grouped-bar chart of rank statistics, three panels: absolute rank counts,
/// counts relative to salient appearances, counts relative to overall
/// appearances on a log scale.
pub fn distribution_svg(dist: &CategoryDistribution, taxonomy: &CategoryTaxonomy) -> String {
    let n = dist.num_categories().min(taxonomy.len());
    let colors = ["#4472c4", "#70ad47", "#ffc000"]; // rank 1, 2, 3
    let panel_w = 30.0 * n as f64 + 60.0;
    let panel_h = 220.0;
    let label_h = 46.0;
    let total_w = panel_w * 3.0 + 40.0;
    let total_h = panel_h + label_h + 40.0;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" \
         viewBox=\"0 0 {:.0} {:.0}\" font-family=\"sans-serif\" font-size=\"10\">\n",
        total_w, total_h, total_w, total_h
    ));

    let abs_max = dist
        .per_category
        .iter()
        .flat_map(|c| c.rank_counts)
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let log_floor = 1e-3f64;

    type PanelValue<'a> = Box<dyn Fn(usize, usize) -> f64 + 'a>;
    let panels: [(&str, PanelValue); 3] = [
        (
            "rank counts",
            Box::new(move |c, k| dist.per_category[c].rank_counts[k] as f64 / abs_max),
        ),
        (
            "relative to salient",
            Box::new(move |c, k| dist.per_category[c].rank_frac_of_salient(k + 1)),
        ),
        (
            "relative to overall (log)",
            Box::new(move |c, k| {
                let v = dist.per_category[c].rank_frac_of_overall(k + 1);
                if v <= log_floor {
                    0.0
                } else {
                    (v.log10() - log_floor.log10()) / (0.0 - log_floor.log10())
                }
            }),
        ),
    ];

    for (pi, (title, value)) in panels.iter().enumerate() {
        let ox = 20.0 + pi as f64 * panel_w;
        let oy = 20.0;
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\">{}</text>\n",
            ox + 10.0,
            oy - 5.0,
            title
        ));
        // axis line
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#333\"/>\n",
            ox,
            oy + panel_h,
            ox + panel_w - 40.0,
            oy + panel_h
        ));
        for c in 0..n {
            let gx = ox + 8.0 + c as f64 * 30.0;
            for k in 0..3 {
                let v = value(c, k).clamp(0.0, 1.0);
                let bh = v * (panel_h - 10.0);
                svg.push_str(&format!(
                    "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"6\" height=\"{:.1}\" fill=\"{}\"/>\n",
                    gx + k as f64 * 7.0,
                    oy + panel_h - bh,
                    bh,
                    colors[k]
                ));
            }
            let name = taxonomy.name((c + 1) as u8).unwrap_or("?");
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" transform=\"rotate(60 {:.1} {:.1})\">{}</text>\n",
                gx,
                oy + panel_h + 12.0,
                gx,
                oy + panel_h + 12.0,
                name
            ));
        }
    }
    // legend
    let ly = panel_h + label_h + 28.0;
    for (k, color) in colors.iter().enumerate() {
        let lx = 24.0 + k as f64 * 90.0;
        svg.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
            lx,
            ly - 9.0,
            color
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">rank {}</text>\n",
            lx + 14.0,
            ly,
            k + 1
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::{RankEntry, RankTable};
    use crate::stats::{cooccurrence, distribution};

    fn sample_data() -> (CategoryDistribution, CooccurrenceMatrix, CategoryTaxonomy) {
        let taxonomy = CategoryTaxonomy::synthetic(3).unwrap();
        let t1 = RankTable {
            image_id: "a".into(),
            entries: vec![
                RankEntry { category: 1, rank_value: 0.9, coverage: 1.0, rank_position: Some(1) },
                RankEntry { category: 2, rank_value: 0.5, coverage: 1.0, rank_position: Some(2) },
            ],
        };
        let t2 = RankTable {
            image_id: "b".into(),
            entries: vec![RankEntry {
                category: 1,
                rank_value: 0.8,
                coverage: 1.0,
                rank_position: Some(1),
            }],
        };
        let sems = vec![
            crate::mask::LabelMask::new(2, 1, vec![1, 2], 3).unwrap(),
            crate::mask::LabelMask::new(2, 1, vec![1, 0], 3).unwrap(),
        ];
        let dist = distribution(&[t1.clone(), t2.clone()], &sems, 3).unwrap();
        let m = cooccurrence(&[t1, t2], 3, 1e-9);
        (dist, m, taxonomy)
    }

    #[test]
    fn distribution_csv_layout() {
        let (dist, _, taxonomy) = sample_data();
        let csv = distribution_csv(&dist, &taxonomy);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "categories,c1,c2,c3");
        assert_eq!(lines[1], "overall,2,1,0");
        assert_eq!(lines[2], "salient,2,1,0");
        assert_eq!(lines[3], "salient_alone,1,0,0");
        assert_eq!(lines[4], "distrib,1.00,1.00,0.00");
        assert_eq!(lines[5], "rank1,2,0,0");
        assert_eq!(lines[6], "rank1_frac,1.00,0.00,0.00");
    }

    #[test]
    fn precedence_csv_leaves_unseen_pairs_empty() {
        let (_, m, taxonomy) = sample_data();
        let csv = cooccurrence_precedence_csv(&m, &taxonomy);
        let lines: Vec<&str> = csv.lines().collect();
        // row c1: diag empty, c2 = 1.00, c3 never co-occurs -> empty
        assert_eq!(lines[1], "c1,,1.00,");
    }

    #[test]
    fn svg_is_wellformed_enough() {
        let (dist, _, taxonomy) = sample_data();
        let svg = distribution_svg(&dist, &taxonomy);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.matches("<rect").count() >= 9 + 3);
        assert!(svg.contains("rank 1"));
    }

    #[test]
    fn reports_are_deterministic() {
        let (dist, m, taxonomy) = sample_data();
        assert_eq!(
            distribution_csv(&dist, &taxonomy),
            distribution_csv(&dist, &taxonomy)
        );
        assert_eq!(
            cooccurrence_counts_csv(&m, &taxonomy),
            cooccurrence_counts_csv(&m, &taxonomy)
        );
        assert_eq!(
            distribution_json(&dist, &taxonomy),
            distribution_json(&dist, &taxonomy)
        );
    }
}
