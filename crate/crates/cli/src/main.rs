//! `sds` — report-emitting command line for the joint segmentation +
//! saliency lab.
//!
//! Exit codes: 0 success, 1 domain/validation error, 2 I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sds_core::io::synth::{generate_synthetic, random_scene, RandomSceneOptions};
use sds_core::io::{
    binarize, load_saliency_map, load_semantic_mask, rank_manifest, write_saliency_map,
    write_semantic_mask, DatasetManifest, ManifestRecord,
};
use sds_core::mask::CategoryTaxonomy;
use sds_core::metrics::{
    confusion, saliency_scores_dataset, segmentation_scores, AucAveraging, ConfusionMatrix,
    MetricConfig,
};
use sds_core::net::checkpoint::save_checkpoint;
use sds_core::net::{
    evaluate_loss, gradcheck_sample, gradient_check, train, RunConfig, TrainSample, Variant,
};
use sds_core::ranking::{semantic_rank, RankConfig, RankTableJson};
use sds_core::report;
use sds_core::stats::{case_study, cooccurrence, distribution};
use sds_core::Error;

#[derive(Parser)]
#[command(
    name = "sds",
    about = "Rank semantic categories by saliency, aggregate dataset statistics, \
             evaluate dense predictions, and train the toy dual-task network",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct TaxonomyArgs {
    /// Number of synthetic categories (c1..cN); omit to use the 20 VOC names.
    #[arg(long)]
    categories: Option<usize>,
}

impl TaxonomyArgs {
    fn build(&self) -> Result<CategoryTaxonomy, Error> {
        match self.categories {
            Some(n) => CategoryTaxonomy::synthetic(n),
            None => Ok(CategoryTaxonomy::voc()),
        }
    }
}

#[derive(Args)]
struct RankFlags {
    /// Coverage threshold for keeping a category.
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Saliency values at or below this level count as no overlap.
    #[arg(long, default_value_t = 0.0)]
    floor: f64,
}

impl RankFlags {
    fn config(&self) -> RankConfig {
        RankConfig {
            coverage_threshold: self.tau,
            saliency_floor: self.floor,
            ..Default::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Rank the semantic categories of one image or a whole manifest.
    Rank {
        /// Semantic mask (indexed or gray PNG); requires --sal.
        #[arg(long, requires = "sal", conflicts_with = "manifest")]
        sem: Option<PathBuf>,
        /// Saliency map (gray PNG).
        #[arg(long)]
        sal: Option<PathBuf>,
        /// Image id recorded in the output (defaults to the mask stem).
        #[arg(long)]
        id: Option<String>,
        /// Manifest of images to rank instead of a single pair.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        rank: RankFlags,
        #[command(flatten)]
        taxonomy: TaxonomyArgs,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-category distribution statistics over a manifest.
    Stats {
        manifest: PathBuf,
        #[command(flatten)]
        rank: RankFlags,
        #[command(flatten)]
        taxonomy: TaxonomyArgs,
        /// Output directory for distribution.{csv,json,svg}.
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Salient co-occurrence and precedence matrices over a manifest.
    Cooccur {
        manifest: PathBuf,
        #[command(flatten)]
        rank: RankFlags,
        #[command(flatten)]
        taxonomy: TaxonomyArgs,
        /// Focus category name for a case study (e.g. person).
        #[arg(long)]
        focus: Option<String>,
        /// Number of top co-occurring categories in the case study.
        #[arg(long, default_value_t = 7)]
        top: usize,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Saliency metrics: predicted maps against binarized ground truth.
    EvalSal {
        /// Manifest whose saliency paths are the predictions.
        #[arg(long)]
        pred: PathBuf,
        /// Manifest whose saliency paths are the ground truth.
        #[arg(long)]
        gt: PathBuf,
        /// F-measure beta squared.
        #[arg(long, default_value_t = 0.3)]
        beta2: f64,
        /// Number of sweep thresholds.
        #[arg(long, default_value_t = 256)]
        thresholds: usize,
        /// Ground-truth binarization threshold.
        #[arg(long, default_value_t = 0.5)]
        bin_threshold: f64,
        /// Pool pixels across images for AUC instead of per-image averaging.
        #[arg(long)]
        pooled: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Segmentation metrics: predicted label masks against ground truth.
    EvalSem {
        /// Manifest whose semantic paths are the predictions.
        #[arg(long)]
        pred: PathBuf,
        /// Manifest whose semantic paths are the ground truth.
        #[arg(long)]
        gt: PathBuf,
        #[command(flatten)]
        taxonomy: TaxonomyArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Train a variant by plain gradient descent; writes checkpoint and loss
    /// trace.
    Train {
        /// Key-value run configuration file.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Verify backprop gradients against central finite differences.
    Gradcheck {
        /// v0..v4, or `all`.
        #[arg(long, default_value = "all")]
        variant: String,
        #[arg(long, default_value_t = 707)]
        seed: u64,
        /// Use the reduced-width configuration (faster).
        #[arg(long)]
        slim: bool,
        /// Optional JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic dataset with known rank order.
    Synth {
        #[arg(long, default_value = "synth")]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Canvas size (square).
        #[arg(long, default_value_t = 48)]
        size: usize,
        /// Plant one region per scene with coverage below this threshold.
        #[arg(long)]
        low_coverage_below: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            fs::write(path, content)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            println!("{}", content);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Rank {
            sem,
            sal,
            id,
            manifest,
            rank,
            taxonomy,
            out,
        } => {
            let taxonomy = taxonomy.build()?;
            let cfg = rank.config();
            let tables: Vec<RankTableJson> = match (sem, manifest) {
                (Some(sem_path), None) => {
                    let sal_path = sal.expect("clap enforces --sal with --sem");
                    let sem = load_semantic_mask(&sem_path, taxonomy.len())?;
                    let sal = load_saliency_map(&sal_path)?;
                    let image_id = id.unwrap_or_else(|| {
                        sem_path
                            .file_stem()
                            .map(|s| s.to_string_lossy().into_owned())
                            .unwrap_or_else(|| "image".into())
                    });
                    let table = semantic_rank(&image_id, &sem, &sal, &cfg)?;
                    vec![RankTableJson::from_table(&table, &taxonomy)]
                }
                (None, Some(path)) => {
                    let manifest = DatasetManifest::load(&path)?;
                    rank_manifest(&manifest, taxonomy.len(), &cfg)?
                        .iter()
                        .map(|(t, _)| RankTableJson::from_table(t, &taxonomy))
                        .collect()
                }
                _ => {
                    return Err(Error::Config(
                        "provide either --sem/--sal or --manifest".into(),
                    ))
                }
            };
            let json = if tables.len() == 1 {
                serde_json::to_string_pretty(&tables[0]).expect("table serializes")
            } else {
                serde_json::to_string_pretty(&tables).expect("tables serialize")
            };
            write_or_print(out.as_deref(), &json)
        }

        Command::Stats {
            manifest,
            rank,
            taxonomy,
            out,
            format,
        } => {
            let taxonomy = taxonomy.build()?;
            let cfg = rank.config();
            let manifest = DatasetManifest::load(&manifest)?;
            let ranked = rank_manifest(&manifest, taxonomy.len(), &cfg)?;
            let (tables, sems): (Vec<_>, Vec<_>) = ranked.into_iter().unzip();
            let dist = distribution(&tables, &sems, taxonomy.len())?;
            fs::create_dir_all(&out)?;
            match format {
                Format::Csv => write_or_print(
                    Some(&out.join("distribution.csv")),
                    &report::distribution_csv(&dist, &taxonomy),
                )?,
                Format::Json => write_or_print(
                    Some(&out.join("distribution.json")),
                    &report::distribution_json(&dist, &taxonomy),
                )?,
            }
            write_or_print(
                Some(&out.join("distribution.svg")),
                &report::distribution_svg(&dist, &taxonomy),
            )
        }

        Command::Cooccur {
            manifest,
            rank,
            taxonomy,
            focus,
            top,
            out,
            format,
        } => {
            let taxonomy = taxonomy.build()?;
            let cfg = rank.config();
            let manifest = DatasetManifest::load(&manifest)?;
            let ranked = rank_manifest(&manifest, taxonomy.len(), &cfg)?;
            let tables: Vec<_> = ranked.into_iter().map(|(t, _)| t).collect();
            let matrix = cooccurrence(&tables, taxonomy.len(), cfg.tie_epsilon);
            fs::create_dir_all(&out)?;
            match format {
                Format::Csv => {
                    write_or_print(
                        Some(&out.join("cooccurrence_counts.csv")),
                        &report::cooccurrence_counts_csv(&matrix, &taxonomy),
                    )?;
                    write_or_print(
                        Some(&out.join("cooccurrence_precedence.csv")),
                        &report::cooccurrence_precedence_csv(&matrix, &taxonomy),
                    )?;
                }
                Format::Json => write_or_print(
                    Some(&out.join("cooccurrence.json")),
                    &serde_json::to_string_pretty(&matrix).expect("matrix serializes"),
                )?,
            }
            if let Some(name) = focus {
                let focus_idx = taxonomy
                    .index_of(&name)
                    .ok_or_else(|| Error::Config(format!("unknown category `{}`", name)))?;
                let cs = case_study(&matrix, focus_idx, top)?;
                match format {
                    Format::Csv => write_or_print(
                        Some(&out.join(format!("case_study_{}.csv", name))),
                        &report::case_study_csv(&cs, &taxonomy),
                    )?,
                    Format::Json => write_or_print(
                        Some(&out.join(format!("case_study_{}.json", name))),
                        &serde_json::to_string_pretty(&cs).expect("case study serializes"),
                    )?,
                }
            }
            Ok(())
        }

        Command::EvalSal {
            pred,
            gt,
            beta2,
            thresholds,
            bin_threshold,
            pooled,
            out,
            format,
        } => {
            let cfg = MetricConfig {
                beta_squared: beta2,
                num_thresholds: thresholds,
            };
            let pred_manifest = DatasetManifest::load(&pred)?;
            let gt_manifest = DatasetManifest::load(&gt)?;
            let mut pairs = Vec::new();
            for (p, g) in pred_manifest.pair_with(&gt_manifest)? {
                let pm = load_saliency_map(&p.saliency)?;
                let gm = binarize(&load_saliency_map(&g.saliency)?, bin_threshold)?;
                pairs.push((pm, gm));
            }
            let mode = if pooled {
                AucAveraging::Pooled
            } else {
                AucAveraging::PerImage
            };
            let score = saliency_scores_dataset(&pairs, &cfg, mode)?;
            let rendered = match format {
                Format::Csv => report::dataset_saliency_scores_csv(&score),
                Format::Json => serde_json::to_string_pretty(&score).expect("score serializes"),
            };
            write_or_print(out.as_deref(), &rendered)
        }

        Command::EvalSem {
            pred,
            gt,
            taxonomy,
            out,
            format,
        } => {
            let taxonomy = taxonomy.build()?;
            let pred_manifest = DatasetManifest::load(&pred)?;
            let gt_manifest = DatasetManifest::load(&gt)?;
            let mut merged = ConfusionMatrix::empty(taxonomy.len() + 1);
            for (p, g) in pred_manifest.pair_with(&gt_manifest)? {
                let pm = load_semantic_mask(&p.semantic, taxonomy.len())?;
                let gm = load_semantic_mask(&g.semantic, taxonomy.len())?;
                merged.merge(&confusion(&pm, &gm, Some(sds_core::mask::IGNORE_LABEL))?)?;
            }
            let scores = segmentation_scores(&merged)?;
            let rendered = match format {
                Format::Csv => format!(
                    "{}\n{}",
                    report::seg_scores_csv(&scores),
                    report::per_class_iou_csv(&scores, &taxonomy)
                ),
                Format::Json => serde_json::to_string_pretty(&scores).expect("scores serialize"),
            };
            write_or_print(out.as_deref(), &rendered)
        }

        Command::Train { config, out } => {
            let run_cfg = RunConfig::load(&config)?;
            let dataset = load_training_scenes(&run_cfg, &config)?;
            let vcfg = run_cfg.variant_config();
            let (net, trace) = train(&vcfg, &dataset, &run_cfg.hyper)?;
            fs::create_dir_all(&out)?;
            let stem = out.join(format!("checkpoint_{}", vcfg.variant.name()));
            save_checkpoint(&net, &stem)?;
            println!("wrote {}", stem.with_extension("bin").display());
            println!("wrote {}", stem.with_extension("json").display());
            write_or_print(Some(&out.join("loss.csv")), &report::loss_trace_csv(&trace))?;
            let final_loss = evaluate_loss(&net, &dataset)?;
            println!(
                "trained {} for {} steps: loss {:.6} -> {:.6}",
                vcfg.variant.name(),
                trace.len(),
                trace.first().copied().unwrap_or(f64::NAN),
                final_loss
            );
            Ok(())
        }

        Command::Gradcheck {
            variant,
            seed,
            slim,
            out,
        } => {
            let variants: Vec<Variant> = if variant.eq_ignore_ascii_case("all") {
                Variant::ALL.to_vec()
            } else {
                vec![Variant::parse(&variant)?]
            };
            let sample = gradcheck_sample(16, 16, 4, seed);
            let mut reports = Vec::new();
            let mut all_passed = true;
            for v in variants {
                let cfg = if slim {
                    sds_core::net::VariantConfig::toy_slim(v, 4)
                } else {
                    sds_core::net::VariantConfig::toy(v, 4)
                };
                let report = gradient_check(&cfg, seed, &sample, 1e-5, 1e-4)?;
                println!(
                    "{} {} max_rel_err={:.3e} params={} worst={}",
                    report.variant.name(),
                    if report.passed { "PASS" } else { "FAIL" },
                    report.max_rel_err,
                    report.num_params,
                    report.worst_param
                );
                all_passed &= report.passed;
                reports.push(report);
            }
            if let Some(path) = out {
                write_or_print(
                    Some(&path),
                    &serde_json::to_string_pretty(&reports).expect("reports serialize"),
                )?;
            }
            if all_passed {
                Ok(())
            } else {
                Err(Error::domain("gradient check failed"))
            }
        }

        Command::Synth {
            out,
            count,
            seed,
            size,
            low_coverage_below,
        } => {
            fs::create_dir_all(&out)?;
            let opts = RandomSceneOptions {
                width: size,
                height: size,
                low_coverage_below,
                ..Default::default()
            };
            let tau = low_coverage_below.unwrap_or(0.5);
            let mut records = Vec::with_capacity(count);
            let mut expected = Vec::with_capacity(count);
            let taxonomy = CategoryTaxonomy::synthetic(6)?;
            for i in 0..count {
                let spec = random_scene(seed.wrapping_add(i as u64), &opts);
                let (sem, sal, table) = generate_synthetic(&spec, tau)?;
                let sem_name = format!("{}_sem.png", table.image_id);
                let sal_name = format!("{}_sal.png", table.image_id);
                write_semantic_mask(&out.join(&sem_name), &sem)?;
                write_saliency_map(&out.join(&sal_name), &sal)?;
                records.push(ManifestRecord {
                    id: table.image_id.clone(),
                    semantic: PathBuf::from(sem_name),
                    saliency: PathBuf::from(sal_name),
                    split: None,
                });
                expected.push(RankTableJson::from_table(&table, &taxonomy));
            }
            let manifest = DatasetManifest::new(records)?;
            manifest.save(&out.join("manifest.json"))?;
            println!("wrote {}", out.join("manifest.json").display());
            write_or_print(
                Some(&out.join("expected_ranks.json")),
                &serde_json::to_string_pretty(&expected).expect("tables serialize"),
            )?;
            println!("generated {} scenes in {}", count, out.display());
            Ok(())
        }
    }
}

/// Loads training scenes from the configured manifest, rendering network
/// inputs from the ground truths. Without a dataset key, trains on one
/// built-in three-region scene.
fn load_training_scenes(cfg: &RunConfig, config_path: &Path) -> Result<Vec<TrainSample>, Error> {
    use sds_core::io::render_input;
    match cfg.dataset.as_deref() {
        Some(rel) => {
            let base = config_path.parent().unwrap_or_else(|| Path::new("."));
            let path = if Path::new(rel).is_relative() {
                base.join(rel)
            } else {
                PathBuf::from(rel)
            };
            let manifest = DatasetManifest::load(&path)?;
            let num_categories = cfg.num_sem_classes - 1;
            manifest
                .records
                .iter()
                .map(|r| {
                    let sem = load_semantic_mask(&r.semantic, num_categories)?;
                    let sal = load_saliency_map(&r.saliency)?;
                    Ok(TrainSample {
                        input: render_input(&sem, &sal),
                        sem_gt: sem,
                        sal_gt: binarize(&sal, 0.5)?,
                    })
                })
                .collect()
        }
        None => {
            use sds_core::io::synth::{PlantedRegion, Rect, SyntheticSceneSpec};
            let spec = SyntheticSceneSpec {
                width: 32,
                height: 32,
                num_categories: cfg.num_sem_classes - 1,
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
            let (sem, sal, _) = generate_synthetic(&spec, 0.5)?;
            Ok(vec![TrainSample {
                input: render_input(&sem, &sal),
                sem_gt: sem,
                sal_gt: binarize(&sal, 0.5)?,
            }])
        }
    }
}
