//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Every expected value is either fixed by construction (edge cases), or
//! computed by an independent oracle implemented in this file (exhaustive
//! pixel scans, sort-based threshold sweeps, brute-force re-scans of rank
//! tables), or frozen from the published per-category dataset counts for the
//! optional real-data tier.
//!
//! Run with `cargo test -p sds-core --test acceptance -- --nocapture` to see
//! the per-criterion lines.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sds_core::io::synth::{generate_synthetic, random_scene, RandomSceneOptions};
use sds_core::io::{binarize, render_input};
use sds_core::mask::{BinaryMask, LabelMask, SaliencyMap};
use sds_core::metrics::{
    confusion, saliency_scores, segmentation_scores, MetricConfig, SaliencyScore,
};
use sds_core::net::{
    gradcheck_sample, gradient_check, total_loss, train, Hyper, Network, TrainSample, Variant,
    VariantConfig,
};
use sds_core::ranking::{semantic_rank, RankConfig, RankEntry, RankTable};
use sds_core::stats::{cooccurrence, distribution, CooccurrenceMatrix};

fn pass(n: usize, name: &str, detail: &str) {
    println!("ACCEPTANCE {:>2} {}: PASS {}", n, name, detail);
}

// ---------------------------------------------------------------------------
// independent oracles
// ---------------------------------------------------------------------------

/// Exhaustive per-class pixel scan; no confusion matrix involved.
struct SegOracle {
    pixel_acc: f64,
    mean_acc: f64,
    per_class_iou: Vec<Option<f64>>,
    mean_iou: f64,
}

fn seg_oracle(pred: &LabelMask, gt: &LabelMask, num_classes: usize) -> SegOracle {
    let total = (pred.width() * pred.height()) as f64;
    let mut correct_total = 0usize;
    let mut per_class_iou = Vec::new();
    let mut acc_sum = 0.0;
    let mut iou_sum = 0.0;
    let mut present = 0usize;
    for c in 0..num_classes as u8 {
        let mut gt_count = 0usize;
        let mut pred_count = 0usize;
        let mut both = 0usize;
        for (&p, &g) in pred.labels().iter().zip(gt.labels().iter()) {
            if g == c {
                gt_count += 1;
            }
            if p == c {
                pred_count += 1;
            }
            if p == c && g == c {
                both += 1;
            }
        }
        correct_total += both;
        if gt_count + pred_count == 0 {
            per_class_iou.push(None);
            continue;
        }
        let acc = if gt_count == 0 {
            0.0
        } else {
            both as f64 / gt_count as f64
        };
        let union = gt_count + pred_count - both;
        let iou = both as f64 / union as f64;
        per_class_iou.push(Some(iou));
        acc_sum += acc;
        iou_sum += iou;
        present += 1;
    }
    SegOracle {
        pixel_acc: correct_total as f64 / total,
        mean_acc: acc_sum / present as f64,
        per_class_iou,
        mean_iou: iou_sum / present as f64,
    }
}

/// Sort-based sweep: order pixels by value once, resolve each threshold by
/// binary search with prefix-sum positive counts, then assemble F and AUC.
fn saliency_oracle(pred: &[f64], gt: &[bool], cfg: &MetricConfig) -> (f64, f64, f64) {
    let n = pred.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pred[a].partial_cmp(&pred[b]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&i| pred[i]).collect();
    let mut prefix_pos = vec![0u64; n + 1];
    for (i, &idx) in order.iter().enumerate() {
        prefix_pos[i + 1] = prefix_pos[i] + u64::from(gt[idx]);
    }
    let total_pos = prefix_pos[n];
    let total_neg = n as u64 - total_pos;

    let div = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let mut best_f = 0.0f64;
    let mut roc = vec![(0.0, 0.0)];
    for &t in cfg.thresholds().iter().rev() {
        let cut = sorted.partition_point(|&v| v <= t);
        let predicted = (n - cut) as u64;
        let tp = total_pos - prefix_pos[cut];
        let fp = predicted - tp;
        let p = div(tp, tp + fp);
        let r = div(tp, total_pos);
        let den = cfg.beta_squared * p + r;
        if den > 0.0 {
            best_f = best_f.max((1.0 + cfg.beta_squared) * p * r / den);
        }
        roc.push((div(fp, total_neg), div(tp, total_pos)));
    }
    if *roc.last().unwrap() != (1.0, 1.0) {
        roc.push((1.0, 1.0));
    }
    let auc: f64 = roc
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum();
    let mae = pred
        .iter()
        .zip(gt.iter())
        .map(|(&v, &g)| (v - f64::from(u8::from(g))).abs())
        .sum::<f64>()
        / n as f64;
    (best_f, auc, mae)
}

/// Brute-force distribution re-scan over rank tables, built on hash maps
/// instead of the library's fold.
fn distribution_oracle(
    tables: &[RankTable],
    sems: &[LabelMask],
    num_categories: usize,
) -> Vec<(usize, usize, usize, [usize; 3])> {
    use std::collections::HashMap;
    let mut overall: HashMap<u8, usize> = HashMap::new();
    let mut salient: HashMap<u8, usize> = HashMap::new();
    let mut alone: HashMap<u8, usize> = HashMap::new();
    let mut ranks: HashMap<(u8, usize), usize> = HashMap::new();
    for (t, s) in tables.iter().zip(sems.iter()) {
        let mut present = std::collections::BTreeSet::new();
        for &l in s.labels() {
            if l != 0 && l != sds_core::mask::IGNORE_LABEL {
                present.insert(l);
            }
        }
        for &c in &present {
            *overall.entry(c).or_default() += 1;
        }
        for e in &t.entries {
            if let Some(pos) = e.rank_position {
                *salient.entry(e.category).or_default() += 1;
                if present.len() == 1 && present.contains(&e.category) {
                    *alone.entry(e.category).or_default() += 1;
                }
                if pos <= 3 {
                    *ranks.entry((e.category, pos)).or_default() += 1;
                }
            }
        }
    }
    (1..=num_categories as u8)
        .map(|c| {
            (
                overall.get(&c).copied().unwrap_or(0),
                salient.get(&c).copied().unwrap_or(0),
                alone.get(&c).copied().unwrap_or(0),
                [1, 2, 3].map(|k| ranks.get(&(c, k)).copied().unwrap_or(0)),
            )
        })
        .collect()
}

/// Brute-force co-occurrence re-scan keyed on category pairs.
fn cooccurrence_oracle(
    tables: &[RankTable],
    tie_epsilon: f64,
) -> std::collections::HashMap<(u8, u8), (usize, usize, usize)> {
    // (count, wins-of-first, ties) keyed by ordered pair
    use std::collections::HashMap;
    let mut out: HashMap<(u8, u8), (usize, usize, usize)> = HashMap::new();
    for t in tables {
        let ranked: Vec<&RankEntry> = t.entries.iter().filter(|e| e.is_ranked()).collect();
        for a in &ranked {
            for b in &ranked {
                if a.category == b.category {
                    continue;
                }
                let entry = out.entry((a.category, b.category)).or_default();
                entry.0 += 1;
                // tied iff connected through the chain of adjacent-by-value
                // ranked entries with gaps <= epsilon
                let mut values: Vec<f64> = ranked.iter().map(|e| e.rank_value).collect();
                values.sort_by(|x, y| y.partial_cmp(x).unwrap());
                let hi = a.rank_value.max(b.rank_value);
                let lo = a.rank_value.min(b.rank_value);
                let mut tied = true;
                let mut prev: Option<f64> = None;
                for &v in values.iter().filter(|&&v| v <= hi && v >= lo) {
                    if let Some(p) = prev {
                        if (p - v).abs() > tie_epsilon {
                            tied = false;
                            break;
                        }
                    }
                    prev = Some(v);
                }
                if tied {
                    entry.2 += 1;
                } else if a.rank_position.unwrap() < b.rank_position.unwrap() {
                    entry.1 += 1;
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_metric_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let cfg = MetricConfig::default();
    let mut worst_seg = 0.0f64;
    let mut worst_sal = 0.0f64;
    for _ in 0..200 {
        let w = rng.gen_range(1..=16);
        let h = rng.gen_range(1..=16);
        let ncat = rng.gen_range(1..=5usize);
        let pred_labels: Vec<u8> = (0..w * h).map(|_| rng.gen_range(0..=ncat as u8)).collect();
        let gt_labels: Vec<u8> = (0..w * h).map(|_| rng.gen_range(0..=ncat as u8)).collect();
        let pred = LabelMask::new(w, h, pred_labels, ncat).unwrap();
        let gt = LabelMask::new(w, h, gt_labels, ncat).unwrap();
        let scores = segmentation_scores(&confusion(&pred, &gt, None).unwrap()).unwrap();
        let oracle = seg_oracle(&pred, &gt, ncat + 1);
        worst_seg = worst_seg
            .max((scores.pixel_acc - oracle.pixel_acc).abs())
            .max((scores.mean_acc - oracle.mean_acc).abs())
            .max((scores.mean_iou - oracle.mean_iou).abs());
        assert_eq!(scores.per_class_iou.len(), oracle.per_class_iou.len());
        for (a, b) in scores.per_class_iou.iter().zip(oracle.per_class_iou.iter()) {
            match (a, b) {
                (Some(x), Some(y)) => worst_seg = worst_seg.max((x - y).abs()),
                (None, None) => {}
                _ => panic!("per-class IoU presence differs: {:?} vs {:?}", a, b),
            }
        }
        assert!(worst_seg < 1e-12, "segmentation oracle mismatch {}", worst_seg);

        let sal_pred: Vec<f64> = (0..w * h).map(|_| rng.gen()).collect();
        let sal_gt: Vec<bool> = (0..w * h).map(|_| rng.gen()).collect();
        let sal = SaliencyMap::new(w, h, sal_pred.clone()).unwrap();
        let gtm = BinaryMask::new(w, h, sal_gt.clone()).unwrap();
        let s: SaliencyScore = saliency_scores(&sal, &gtm, &cfg).unwrap();
        let (of, oa, om) = saliency_oracle(&sal_pred, &sal_gt, &cfg);
        assert!((s.mae - om).abs() < 1e-12, "mae {} vs {}", s.mae, om);
        worst_sal = worst_sal
            .max((s.f_measure_max - of).abs())
            .max((s.auc - oa).abs());
        assert!(worst_sal < 1e-9, "saliency oracle mismatch {}", worst_sal);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {:?}", elapsed);
    pass(
        1,
        "metric-oracle-equivalence",
        &format!(
            "(200 pairs, worst seg dev {:.2e}, worst F/AUC dev {:.2e}, {:?})",
            worst_seg, worst_sal, elapsed
        ),
    );
}

#[test]
fn criterion_02_metric_edge_cases() {
    let cfg = MetricConfig::default();
    // perfect prediction
    let bits: Vec<bool> = (0..64).map(|i| i % 3 == 0).collect();
    let gt = BinaryMask::new(8, 8, bits.clone()).unwrap();
    let pred = SaliencyMap::new(
        8,
        8,
        bits.iter().map(|&b| f64::from(u8::from(b))).collect(),
    )
    .unwrap();
    let s = saliency_scores(&pred, &gt, &cfg).unwrap();
    assert_eq!(s.f_measure_max, 1.0);
    assert_eq!(s.auc, 1.0);
    assert_eq!(s.mae, 0.0);

    let labels: Vec<u8> = (0..64).map(|i| (i % 4) as u8).collect();
    let m = LabelMask::new(8, 8, labels, 3).unwrap();
    let seg = segmentation_scores(&confusion(&m, &m, None).unwrap()).unwrap();
    assert_eq!(seg.mean_iou, 1.0);
    assert_eq!(seg.pixel_acc, 1.0);

    // constant 0.5 prediction: ROC collapses to the endpoints
    let flat = SaliencyMap::uniform(8, 8, 0.5).unwrap();
    let s2 = saliency_scores(&flat, &gt, &cfg).unwrap();
    assert_eq!(s2.auc, 0.5);
    assert_eq!(s2.roc_curve, vec![(0.0, 0.0), (1.0, 1.0)]);
    pass(2, "metric-edge-cases", "(perfect and constant-0.5 predictions)");
}

#[test]
fn criterion_03_planted_rank_recovery() {
    let start = Instant::now();
    let cfg = RankConfig::default();
    let mut full_ok = 0;
    for seed in 0..100u64 {
        let spec = random_scene(seed, &RandomSceneOptions::default());
        let (sem, sal, expected) = generate_synthetic(&spec, cfg.coverage_threshold).unwrap();
        let got = semantic_rank(&expected.image_id, &sem, &sal, &cfg).unwrap();
        assert_eq!(got, expected, "full-coverage scene {}", seed);
        full_ok += 1;
    }
    let opts = RandomSceneOptions {
        low_coverage_below: Some(cfg.coverage_threshold),
        ..Default::default()
    };
    let mut low_ok = 0;
    for seed in 0..100u64 {
        let spec = random_scene(seed, &opts);
        let low_cat = spec
            .regions
            .iter()
            .find(|r| r.salient_fraction < 1.0)
            .expect("one low-coverage region planted")
            .category;
        let (sem, sal, expected) = generate_synthetic(&spec, cfg.coverage_threshold).unwrap();
        let got = semantic_rank(&expected.image_id, &sem, &sal, &cfg).unwrap();
        assert_eq!(got, expected, "low-coverage scene {}", seed);
        let entry = got.entry(low_cat).expect("entry exists");
        assert!(!entry.is_ranked(), "scene {}: low-coverage category ranked", seed);
        low_ok += 1;
    }
    let elapsed = start.elapsed();
    assert_eq!((full_ok, low_ok), (100, 100));
    assert!(elapsed.as_secs_f64() < 5.0, "took {:?}", elapsed);
    pass(
        3,
        "planted-rank-recovery",
        &format!("(100/100 full, 100/100 below-tau absent, {:?})", elapsed),
    );
}

#[test]
fn criterion_04_ranking_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    for case in 0..500u64 {
        let mut spec = random_scene(case, &RandomSceneOptions::default());
        // randomize per-region coverage so the tau threshold has bite
        for r in &mut spec.regions {
            r.salient_fraction = rng.gen_range(0.05..=1.0);
        }
        let (sem, sal, _) = generate_synthetic(&spec, 0.0).unwrap();

        // tau-monotonicity: raising tau never adds a ranked category
        let tau_lo: f64 = rng.gen_range(0.0..1.0);
        let tau_hi: f64 = rng.gen_range(tau_lo..=1.0);
        let at_lo = semantic_rank("m", &sem, &sal, &RankConfig::with_tau(tau_lo)).unwrap();
        let at_hi = semantic_rank("m", &sem, &sal, &RankConfig::with_tau(tau_hi)).unwrap();
        let lo_set: Vec<u8> = at_lo.ranked().map(|e| e.category).collect();
        for e in at_hi.ranked() {
            assert!(
                lo_set.contains(&e.category),
                "case {}: tau {} ranked {} but tau {} did not",
                case,
                tau_hi,
                e.category,
                tau_lo
            );
        }

        // scale covariance: argsort survives multiplying saliency by s
        let cfg = RankConfig::with_tau(rng.gen_range(0.0..=1.0));
        let s: f64 = rng.gen_range(0.1..=1.0);
        let scaled =
            SaliencyMap::new(sal.width(), sal.height(), sal.values().iter().map(|v| v * s).collect())
                .unwrap();
        let base = semantic_rank("s", &sem, &sal, &cfg).unwrap();
        let scl = semantic_rank("s", &sem, &scaled, &cfg).unwrap();
        let base_order: Vec<u8> = base.ranked().map(|e| e.category).collect();
        let scl_order: Vec<u8> = scl.ranked().map(|e| e.category).collect();
        assert_eq!(base_order, scl_order, "case {}: scale changed order", case);
        for (a, b) in base.ranked().zip(scl.ranked()) {
            assert!(
                (b.rank_value - a.rank_value * s).abs() <= 1e-12,
                "case {}: rank value did not scale",
                case
            );
        }

        // permutation invariance: relabeling categories permutes entries only
        let ncat = sem.num_categories();
        let mut perm: Vec<u8> = (1..=ncat as u8).collect();
        for i in (1..perm.len()).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let relabeled: Vec<u8> = sem
            .labels()
            .iter()
            .map(|&l| if l == 0 { 0 } else { perm[l as usize - 1] })
            .collect();
        let sem_p = LabelMask::new(sem.width(), sem.height(), relabeled, ncat).unwrap();
        let tab_p = semantic_rank("p", &sem_p, &sal, &cfg).unwrap();
        let expect: Vec<(u8, f64, usize)> = base
            .ranked()
            .map(|e| (perm[e.category as usize - 1], e.rank_value, e.rank_position.unwrap()))
            .collect();
        let got: Vec<(u8, f64, usize)> = tab_p
            .ranked()
            .map(|e| (e.category, e.rank_value, e.rank_position.unwrap()))
            .collect();
        assert_eq!(got, expect, "case {}: permutation broke the table", case);
    }
    pass(4, "ranking-properties", "(500 fuzz cases)");
}

#[test]
fn criterion_05_statistics_integrity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    let cfg = RankConfig::default();
    let num_categories = 6;

    // scenes with varied coverage, plus handcrafted tables with exact ties
    let mut tables = Vec::new();
    let mut sems = Vec::new();
    for seed in 0..120u64 {
        let mut spec = random_scene(seed, &RandomSceneOptions::default());
        for r in &mut spec.regions {
            r.salient_fraction = rng.gen_range(0.2..=1.0);
        }
        let (sem, sal, _) = generate_synthetic(&spec, 0.0).unwrap();
        tables.push(semantic_rank(&format!("img{}", seed), &sem, &sal, &cfg).unwrap());
        sems.push(sem);
    }
    for i in 0..20 {
        // exact ties between categories 1 and 2, category 3 below
        tables.push(RankTable {
            image_id: format!("tie{}", i),
            entries: vec![
                RankEntry { category: 1, rank_value: 0.8, coverage: 1.0, rank_position: Some(1) },
                RankEntry { category: 2, rank_value: 0.8, coverage: 0.9, rank_position: Some(2) },
                RankEntry { category: 3, rank_value: 0.2, coverage: 1.0, rank_position: Some(3) },
            ],
        });
        sems.push(
            LabelMask::new(3, 1, vec![1, 2, 3], num_categories).unwrap(),
        );
    }

    let m: CooccurrenceMatrix = cooccurrence(&tables, num_categories, cfg.tie_epsilon);
    let oracle = cooccurrence_oracle(&tables, cfg.tie_epsilon);
    let mut checked_pairs = 0;
    for a in 1..=num_categories as u8 {
        assert_eq!(m.count(a, a), 0, "diagonal must be zero");
        for b in 1..=num_categories as u8 {
            if a == b {
                continue;
            }
            assert_eq!(m.count(a, b), m.count(b, a), "counts must be symmetric");
            let (ocount, owins, oties) = oracle.get(&(a, b)).copied().unwrap_or((0, 0, 0));
            assert_eq!(m.count(a, b), ocount, "count oracle mismatch at ({},{})", a, b);
            assert_eq!(m.wins(a, b), owins, "wins oracle mismatch at ({},{})", a, b);
            assert_eq!(m.tie_count(a, b), oties, "ties oracle mismatch at ({},{})", a, b);
            // exact integer identity and the probability bound it implies
            assert_eq!(
                m.wins(a, b) + m.wins(b, a) + m.tie_count(a, b),
                m.count(a, b),
                "precedence identity broken at ({},{})",
                a,
                b
            );
            if m.count(a, b) > 0 {
                let p = m.precedence(a, b) + m.precedence(b, a);
                assert!(p <= 1.0 + 1e-15, "precedence sum {} > 1", p);
                checked_pairs += 1;
            } else {
                assert!(m.precedence(a, b).is_nan());
            }
        }
    }
    assert!(checked_pairs > 0);

    let dist = distribution(&tables, &sems, num_categories).unwrap();
    let oracle = distribution_oracle(&tables, &sems, num_categories);
    for (c, (overall, salient, alone, ranks)) in oracle.into_iter().enumerate() {
        let got = &dist.per_category[c];
        assert_eq!(
            (got.overall, got.salient, got.salient_alone, got.rank_counts),
            (overall, salient, alone, ranks),
            "distribution oracle mismatch for category {}",
            c + 1
        );
        assert!(got.salient <= got.overall);
        assert!(got.salient_alone <= got.salient);
        assert!(got.rank_counts.iter().sum::<usize>() <= got.salient);
    }
    pass(
        5,
        "statistics-integrity",
        &format!("(140 tables, {} co-occurring pairs)", checked_pairs),
    );
}

#[test]
fn criterion_06_gradient_verification() {
    let start = Instant::now();
    let mut details = Vec::new();
    for variant in Variant::ALL {
        let cfg = VariantConfig::toy(variant, 4);
        let sample = gradcheck_sample(16, 16, 4, 606);
        let report = gradient_check(&cfg, 707, &sample, 1e-5, 1e-4).unwrap();
        assert!(
            report.passed,
            "{}: max rel err {} at {} over {} params",
            variant.name(),
            report.max_rel_err,
            report.worst_param,
            report.num_params
        );
        details.push(format!(
            "{} {:.1e}/{}p",
            variant.name(),
            report.max_rel_err,
            report.num_params
        ));
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {:?}", elapsed);
    pass(
        6,
        "gradient-verification",
        &format!("({}, {:?})", details.join(", "), elapsed),
    );
}

#[test]
fn criterion_07_loss_decomposition() {
    let sample = gradcheck_sample(16, 16, 4, 777);
    let sem = sds_core::net::downsample_labels(&sample.sem_gt, 2, 2).unwrap();
    let sal = sds_core::net::downsample_binary(&sample.sal_gt, 2, 2).unwrap();
    for variant in Variant::ALL {
        let net = Network::new(VariantConfig::toy(variant, 4), 17).unwrap();
        let (out, _) = net.forward(&sample.input).unwrap();
        let (terms, _) = total_loss(&out, &sem, &sal).unwrap();
        assert_eq!(
            terms.refined.is_some(),
            variant == Variant::V3Refined,
            "refined term present iff the refined variant"
        );
        // recompute each component independently and compare the sum
        let (sem_l, _) =
            sds_core::net::cross_entropy_loss(&out.s_theta, sem.labels()).unwrap();
        let sal_labels: Vec<u8> = sal.bits().iter().map(|&b| u8::from(b)).collect();
        let (sal_l, _) = sds_core::net::cross_entropy_loss(&out.s_d, &sal_labels).unwrap();
        let refined_l = out
            .s_d_refined
            .as_ref()
            .map(|r| sds_core::net::cross_entropy_loss(r, &sal_labels).unwrap().0)
            .unwrap_or(0.0);
        assert!(
            (terms.total() - (sem_l + sal_l + refined_l)).abs() <= 1e-15,
            "{:?}: loss does not decompose",
            variant
        );
    }
    pass(7, "loss-decomposition", "(all variants, tolerance 1e-15)");
}

#[test]
fn criterion_08_shape_contract() {
    let sizes = [16usize, 24, 32, 64];
    let mut checked = 0;
    for variant in Variant::ALL {
        let net = Network::new(VariantConfig::toy_slim(variant, 4), 88).unwrap();
        for &h in &sizes {
            for &w in &sizes {
                let mut x = sds_core::net::Tensor4::zeros(1, 3, h, w);
                for (i, v) in x.data_mut().iter_mut().enumerate() {
                    *v = (i % 11) as f64 / 11.0;
                }
                let (out, _) = net.forward(&x).unwrap();
                assert_eq!(out.s_theta.shape(), (1, 4, h / 8, w / 8));
                assert_eq!(out.s_d.shape(), (1, 2, h / 8, w / 8));
                if let Some(r) = out.s_d_refined.as_ref() {
                    assert_eq!(r.shape(), (1, 2, h / 8, w / 8));
                }
                checked += 1;
            }
        }
    }
    pass(
        8,
        "shape-contract",
        &format!("({} variant x size combinations)", checked),
    );
}

#[test]
fn criterion_09_overfit() {
    use sds_core::io::synth::{PlantedRegion, Rect, SyntheticSceneSpec};
    let spec = SyntheticSceneSpec {
        width: 32,
        height: 32,
        num_categories: 3,
        regions: vec![
            PlantedRegion {
                category: 1,
                rect: Rect { x0: 0, y0: 0, x1: 16, y1: 16 },
                level: 0.9,
                salient_fraction: 1.0,
            },
            PlantedRegion {
                category: 2,
                rect: Rect { x0: 16, y0: 0, x1: 32, y1: 16 },
                level: 0.6,
                salient_fraction: 1.0,
            },
            PlantedRegion {
                category: 3,
                rect: Rect { x0: 0, y0: 16, x1: 16, y1: 32 },
                level: 0.3,
                salient_fraction: 1.0,
            },
        ],
        seed: 0,
    };
    let (sem, sal, _) = generate_synthetic(&spec, 0.5).unwrap();
    let sample = TrainSample {
        input: render_input(&sem, &sal),
        sem_gt: sem,
        sal_gt: binarize(&sal, 0.5).unwrap(),
    };
    let hyper = Hyper { lr: 0.1, steps: 500, seed: 42 };
    let mut details = Vec::new();
    for variant in Variant::ALL {
        let start = Instant::now();
        let cfg = VariantConfig::toy(variant, 4);
        let (_, trace) = train(&cfg, &[sample.clone()], &hyper).unwrap();
        let initial = trace[0];
        let final_loss = *trace.last().unwrap();
        assert!(initial > 1.0, "{}: initial loss {} not > 1", variant.name(), initial);
        assert!(
            final_loss < 0.05,
            "{}: final loss {} not < 0.05",
            variant.name(),
            final_loss
        );
        // determinism: the same seed reproduces the trace bitwise
        let (_, again) = train(&cfg, &[sample.clone()], &hyper).unwrap();
        assert_eq!(trace, again, "{}: trace not deterministic", variant.name());
        let elapsed = start.elapsed();
        assert!(elapsed.as_secs_f64() < 120.0, "{}: took {:?}", variant.name(), elapsed);
        details.push(format!("{} {:.0e}", variant.name(), final_loss));
    }
    pass(
        9,
        "overfit",
        &format!("(500 steps, lr 0.1: {})", details.join(", ")),
    );
}

/// Published per-category counts for the optional real-data tier: the overall
/// appearance row, the salient/rank-1 windows for `person`, and the
/// person–motorbike co-occurrence.
const OVERALL_ROW: [usize; 20] = [
    57, 53, 73, 11, 60, 44, 80, 85, 41, 45, 32, 81, 50, 52, 241, 48, 35, 25, 51, 42,
];

#[test]
fn criterion_10_dataset_optional() {
    let Ok(manifest_path) = std::env::var("SDS_PASCAL_MANIFEST") else {
        println!(
            "ACCEPTANCE 10 dataset-optional: SKIP (set SDS_PASCAL_MANIFEST to a manifest of \
             VOC-indexed semantic masks + saliency agreement maps to enable)"
        );
        return;
    };
    let taxonomy = sds_core::mask::CategoryTaxonomy::voc();
    let manifest =
        sds_core::io::DatasetManifest::load(std::path::Path::new(&manifest_path)).unwrap();
    let person = taxonomy.index_of("person").unwrap();
    let mbike = taxonomy.index_of("mbike").unwrap();

    // overall counts do not depend on tau
    let base = sds_core::io::rank_manifest(&manifest, taxonomy.len(), &RankConfig::default())
        .unwrap();
    let (tables, sems): (Vec<_>, Vec<_>) = base.into_iter().unzip();
    let dist = distribution(&tables, &sems, taxonomy.len()).unwrap();
    for (i, &expect) in OVERALL_ROW.iter().enumerate() {
        assert_eq!(
            dist.per_category[i].overall,
            expect,
            "overall count for {} deviates",
            taxonomy.names()[i]
        );
    }

    let mut person_window_ok = false;
    let mut cooc_ok = false;
    let mut log = Vec::new();
    for tau in [0.3, 0.4, 0.5, 0.6] {
        let cfg = RankConfig::with_tau(tau);
        let ranked = sds_core::io::rank_manifest(&manifest, taxonomy.len(), &cfg).unwrap();
        let (tables, sems): (Vec<_>, Vec<_>) = ranked.into_iter().unzip();
        let dist = distribution(&tables, &sems, taxonomy.len()).unwrap();
        let m = cooccurrence(&tables, taxonomy.len(), cfg.tie_epsilon);
        let salient = dist.counts(person).salient;
        let rank1 = dist.counts(person).rank_counts[0];
        let cooc = m.count(person, mbike);
        log.push(format!(
            "tau={}: person salient {} rank1 {} cooc {}",
            tau, salient, rank1, cooc
        ));
        if salient.abs_diff(234) <= 5 && rank1.abs_diff(183) <= 10 {
            person_window_ok = true;
        }
        if cooc.abs_diff(28) <= 3 {
            cooc_ok = true;
        }
    }
    assert!(person_window_ok, "no tau matched the person windows: {:?}", log);
    assert!(cooc_ok, "no tau matched the co-occurrence window: {:?}", log);
    pass(10, "dataset-optional", &format!("({})", log.join("; ")));
}
