//! The subcommands. Each returns an [`Outcome`] or a [`CliError`].

use std::ffi::OsStr;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use stegdist_core::distribution::region_log_mass;
use stegdist_core::embed::embed_with_costs;
use stegdist_core::synthetic::{half_flat_composite, in_flat_half};
use stegdist_core::{
    max_capacity, read_pgm, render_probability_heatmap, solve_lambda, write_pgm, CostFunction,
    CostMap, DistributionModel, GrayImage, PayloadSpec,
};

use crate::config::RunConfig;
use crate::report::{write_report, CapacityRow, CompareRow, CostRow, FlagRow, GroupRow, ReportRow};

/// Side length of the built-in composite used by `compare`.
pub const COMPOSITE_SIZE: usize = 256;
/// Noise seed of the built-in composite.
pub const COMPOSITE_SEED: u64 = 2024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad arguments or configuration; exit code 1.
    Usage(String),
    /// Nothing could be produced; exit code 2.
    Fatal(String),
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub processed: usize,
    pub flags: Vec<FlagRow>,
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct Input {
    pub id: String,
    pub path: PathBuf,
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .and_then(OsStr::to_str)
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

/// Expands directories to their `*.pgm` files and sorts everything by file name.
pub fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<Input>, CliError> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let entries = fs::read_dir(path)
                .map_err(|e| CliError::Fatal(format!("{}: {e}", path.display())))?;
            for entry in entries {
                let entry =
                    entry.map_err(|e| CliError::Fatal(format!("{}: {e}", path.display())))?;
                let p = entry.path();
                if p.is_file() && is_pgm(&p) {
                    files.push(p);
                }
            }
        } else {
            files.push(path.clone());
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()).then_with(|| a.cmp(b)));
    files.dedup();
    let mut inputs: Vec<Input> = files
        .into_iter()
        .map(|path| Input {
            id: path.file_stem().map_or_else(
                || path.display().to_string(),
                |s| s.to_string_lossy().into_owned(),
            ),
            path,
        })
        .collect();
    for pair in inputs.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(CliError::Usage(format!(
                "duplicate image name {:?} ({} and {})",
                pair[0].id,
                pair[0].path.display(),
                pair[1].path.display()
            )));
        }
    }
    inputs.shrink_to_fit();
    Ok(inputs)
}

fn load(input: &Input) -> Result<GrayImage, String> {
    let bytes = fs::read(&input.path).map_err(|e| format!("{}: {e}", input.path.display()))?;
    read_pgm(&bytes).map_err(|e| format!("{}: {e}", input.path.display()))
}

fn load_with_costs(input: &Input, cost: CostFunction) -> Result<(GrayImage, CostMap), String> {
    let img = load(input)?;
    let costs = cost
        .compute(&img)
        .map_err(|e| format!("{}: {e}", input.path.display()))?;
    Ok((img, costs))
}

fn flag(input: &Input, error: impl Into<String>) -> FlagRow {
    FlagRow {
        image: input.id.clone(),
        error: error.into(),
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), String> {
    fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn elapsed_ms(start: Instant, timing: bool) -> u64 {
    if timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    }
}

fn require_inputs(cfg: &RunConfig) -> Result<Vec<Input>, CliError> {
    let inputs = collect_inputs(&cfg.inputs)?;
    if inputs.is_empty() {
        return Err(CliError::Usage("no input images (use --in)".into()));
    }
    Ok(inputs)
}

fn prepare_out(cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.out)
        .map_err(|e| CliError::Fatal(format!("{}: {e}", cfg.out.display())))?;
    write(
        &cfg.out.join("manifest.txt"),
        cfg.to_manifest(command).as_bytes(),
    )
    .map_err(CliError::Fatal)
}

fn usage<T>(r: Result<T, String>) -> Result<T, CliError> {
    r.map_err(CliError::Usage)
}

fn fatal<T>(r: std::io::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Fatal(e.to_string()))
}

/// Finishes a per-image command: partial failures are flags, total failure is fatal.
fn finish(processed: usize, flags: Vec<FlagRow>, report: PathBuf) -> Result<Outcome, CliError> {
    for f in &flags {
        eprintln!("stegdist: {}: {}", f.image, f.error);
    }
    if processed == 0 && !flags.is_empty() {
        return Err(CliError::Fatal(format!(
            "all {} input(s) failed; see {}",
            flags.len(),
            report.display()
        )));
    }
    Ok(Outcome {
        processed,
        flags,
        report: Some(report),
    })
}

pub fn run_command(command: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        "cost" => cost(cfg),
        "probmap" => probmap(cfg),
        "embed" => embed(cfg),
        "compare" => compare(cfg),
        "capacity" => capacity(cfg),
        other => Err(CliError::Usage(format!("unknown command {other:?}"))),
    }
}

fn cost(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let cost_fn = usage(cfg.single_cost())?;
    let inputs = require_inputs(cfg)?;
    prepare_out(cfg, "cost")?;
    let results: Vec<Result<CostRow, String>> = inputs
        .par_iter()
        .map(|input| {
            let (_, costs) = load_with_costs(input, cost_fn)?;
            write(
                &cfg.out.join(format!("{}.cost", input.id)),
                &costs.to_bytes(),
            )?;
            if cfg.csv {
                write(
                    &cfg.out.join(format!("{}.cost.csv", input.id)),
                    costs.to_csv().as_bytes(),
                )?;
            }
            let dry = costs
                .costs()
                .iter()
                .copied()
                .filter(|&c| !stegdist_core::costs::is_wet(c));
            Ok(CostRow {
                image: input.id.clone(),
                width: costs.width(),
                height: costs.height(),
                wet_pixels: costs.wet_count(),
                min_cost: costs.costs().iter().copied().fold(f64::INFINITY, f64::min),
                max_dry_cost: dry.fold(0.0, f64::max),
            })
        })
        .collect();
    let (rows, flags) = split(&inputs, results);
    let report = fatal(write_report(
        &cfg.out, "costs", cfg.format, &rows, None, &flags,
    ))?;
    finish(rows.len(), flags, report)
}

fn split<T>(inputs: &[Input], results: Vec<Result<T, String>>) -> (Vec<T>, Vec<FlagRow>) {
    let mut rows = Vec::new();
    let mut flags = Vec::new();
    for (input, r) in inputs.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => flags.push(flag(input, e)),
        }
    }
    (rows, flags)
}

fn probmap(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let cost_fn = usage(cfg.single_cost())?;
    let inputs = require_inputs(cfg)?;
    prepare_out(cfg, "probmap")?;
    let results: Vec<Result<(Vec<Option<ReportRow>>, Vec<String>), String>> = inputs
        .par_iter()
        .enumerate()
        .map(|(index, input)| {
            let start = Instant::now();
            let (img, costs) = load_with_costs(input, cost_fn)?;
            let sat = img.saturation_flags();
            let m = PayloadSpec::Relative(cfg.alpha)
                .message_bits(img.len())
                .map_err(|e| e.to_string())?;
            let mut rows = Vec::new();
            let mut errors = Vec::new();
            for &model in &cfg.models {
                let pm = match solve_lambda(&costs, &sat, m, model) {
                    Ok(pm) => pm,
                    Err(e) => {
                        rows.push(None);
                        errors.push(format!("{model}: {e}"));
                        continue;
                    }
                };
                let heat = render_probability_heatmap(&pm).map_err(|e| e.to_string())?;
                let stem = format!("{}.{}", input.id, model.name());
                write(&cfg.out.join(format!("{stem}.heat.pgm")), &write_pgm(&heat))?;
                write(&cfg.out.join(format!("{stem}.prob")), &pm.to_bytes())?;
                let entropy = pm.entropy();
                rows.push(Some(ReportRow {
                    image: input.id.clone(),
                    lambda: pm.lambda(),
                    entropy_bits: entropy,
                    expected_distortion: stegdist_core::expected_distortion(&costs, &pm)
                        .map_err(|e| e.to_string())?,
                    change_rate: pm.expected_change_rate(),
                    entropy_share: 1.0,
                    group_id: index,
                    wall_ms: elapsed_ms(start, cfg.timing),
                }));
            }
            Ok((rows, errors))
        })
        .collect();

    let mut per_model: Vec<Vec<ReportRow>> = vec![Vec::new(); cfg.models.len()];
    let mut flags = Vec::new();
    let mut processed = 0;
    for (input, r) in inputs.iter().zip(results) {
        match r {
            Ok((rows, errors)) => {
                if rows.iter().any(Option::is_some) {
                    processed += 1;
                }
                for (k, row) in rows.into_iter().enumerate() {
                    per_model[k].extend(row);
                }
                flags.extend(errors.into_iter().map(|e| flag(input, e)));
            }
            Err(e) => flags.push(flag(input, e)),
        }
    }
    let mut report = None;
    for (model, rows) in cfg.models.iter().zip(&per_model) {
        let stem = format!("report.{}", model.name());
        report = Some(fatal(write_report(
            &cfg.out, &stem, cfg.format, rows, None, &flags,
        ))?);
    }
    finish(processed, flags, report.expect("at least one model"))
}

struct GroupOutcome {
    rows: Vec<ReportRow>,
    group: Option<GroupRow>,
    flags: Vec<FlagRow>,
}

fn embed_group(
    cfg: &RunConfig,
    cost_fn: CostFunction,
    model: DistributionModel,
    group_id: usize,
    members: &[Input],
) -> Result<GroupOutcome, String> {
    let start = Instant::now();
    let loaded: Vec<Result<(GrayImage, CostMap), String>> = members
        .par_iter()
        .map(|m| load_with_costs(m, cost_fn))
        .collect();
    let mut flags = Vec::new();
    let mut ok = Vec::new();
    for (member, r) in members.iter().zip(loaded) {
        match r {
            Ok(pair) => ok.push((member, pair)),
            Err(e) => flags.push(flag(member, e)),
        }
    }
    if ok.is_empty() {
        return Ok(GroupOutcome {
            rows: Vec::new(),
            group: None,
            flags,
        });
    }
    let pixels: usize = ok.iter().map(|(_, (img, _))| img.len()).sum();
    let bits = PayloadSpec::Relative(cfg.alpha)
        .message_bits(pixels)
        .map_err(|e| e.to_string())?;
    let covers: Vec<&GrayImage> = ok.iter().map(|(_, (img, _))| img).collect();
    let costs: Vec<CostMap> = ok.iter().map(|(_, (_, c))| c.clone()).collect();
    let seed = cfg.seed.wrapping_add((group_id * cfg.group_n) as u64);
    let (results, alloc) = match embed_with_costs(&covers, costs, model, bits, seed) {
        Ok(r) => r,
        Err(e) => {
            flags.extend(ok.iter().map(|(member, _)| flag(member, e.to_string())));
            return Ok(GroupOutcome {
                rows: Vec::new(),
                group: None,
                flags,
            });
        }
    };
    for ((member, _), result) in ok.iter().zip(&results) {
        write(
            &cfg.out.join(format!("{}.stego.pgm", member.id)),
            &write_pgm(&result.stego),
        )?;
        if cfg.changes {
            write(
                &cfg.out.join(format!("{}.changes.pgm", member.id)),
                &write_pgm(&result.changes.to_image()),
            )?;
        }
    }
    let share_sum: f64 = alloc.shares.iter().sum();
    let wall_ms = elapsed_ms(start, cfg.timing);
    let rows = ok
        .iter()
        .zip(&results)
        .map(|((member, _), r)| ReportRow {
            image: member.id.clone(),
            lambda: alloc.lambda,
            entropy_bits: r.expected_entropy,
            expected_distortion: r.expected_distortion,
            change_rate: r.realized_change_rate,
            entropy_share: if share_sum > 0.0 {
                r.expected_entropy / share_sum
            } else {
                0.0
            },
            group_id,
            wall_ms,
        })
        .collect();
    let group = GroupRow {
        group_id,
        images: ok.len(),
        lambda: alloc.lambda,
        total_payload_bits: alloc.total_payload,
        share_sum_bits: share_sum,
        members: ok
            .iter()
            .map(|(m, _)| m.id.as_str())
            .collect::<Vec<_>>()
            .join(";"),
    };
    Ok(GroupOutcome {
        rows,
        group: Some(group),
        flags,
    })
}

fn embed(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let cost_fn = usage(cfg.single_cost())?;
    let model = usage(cfg.single_model())?;
    let inputs = require_inputs(cfg)?;
    prepare_out(cfg, "embed")?;
    let outcomes: Vec<Result<GroupOutcome, String>> = inputs
        .par_chunks(cfg.group_n)
        .enumerate()
        .map(|(g, members)| embed_group(cfg, cost_fn, model, g, members))
        .collect();
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    let mut flags = Vec::new();
    for outcome in outcomes {
        let outcome = outcome.map_err(CliError::Fatal)?;
        rows.extend(outcome.rows);
        groups.extend(outcome.group);
        flags.extend(outcome.flags);
    }
    let report = fatal(write_report(
        &cfg.out,
        "report",
        cfg.format,
        &rows,
        Some(&groups),
        &flags,
    ))?;
    finish(rows.len(), flags, report)
}

fn capacity(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let cost_fn = usage(cfg.single_cost())?;
    let inputs = require_inputs(cfg)?;
    prepare_out(cfg, "capacity")?;
    let results: Vec<Result<CapacityRow, String>> = inputs
        .par_iter()
        .map(|input| {
            let (img, costs) = load_with_costs(input, cost_fn)?;
            let bits = max_capacity(&costs, &img.saturation_flags()).map_err(|e| e.to_string())?;
            Ok(CapacityRow {
                image: input.id.clone(),
                width: img.width(),
                height: img.height(),
                wet_pixels: costs.wet_count(),
                capacity_bits: bits,
                capacity_bpp: bits / img.len() as f64,
            })
        })
        .collect();
    let (mut rows, flags) = split(&inputs, results);
    rows.sort_by(|a, b| {
        b.capacity_bits
            .total_cmp(&a.capacity_bits)
            .then_with(|| a.image.cmp(&b.image))
    });
    let report = fatal(write_report(
        &cfg.out, "capacity", cfg.format, &rows, None, &flags,
    ))?;
    finish(rows.len(), flags, report)
}

/// Smooth-half log-mass (base 10) and its fraction of the total mass.
pub fn smooth_mass_proxy(
    composite: &GrayImage,
    costs: &CostMap,
    model: DistributionModel,
    alpha: f64,
) -> Result<(f64, f64), String> {
    let m = PayloadSpec::Relative(alpha)
        .message_bits(composite.len())
        .map_err(|e| e.to_string())?;
    let pm =
        solve_lambda(costs, &composite.saturation_flags(), m, model).map_err(|e| e.to_string())?;
    let w = composite.width();
    let flat =
        region_log_mass(costs, &pm, |_, col| in_flat_half(col, w)).map_err(|e| e.to_string())?;
    let total = region_log_mass(costs, &pm, |_, _| true).map_err(|e| e.to_string())?;
    let fraction = if total == f64::NEG_INFINITY {
        0.0
    } else {
        (flat - total).exp()
    };
    Ok((flat / std::f64::consts::LN_10, fraction))
}

fn compare(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let inputs = collect_inputs(&cfg.inputs)?;
    prepare_out(cfg, "compare")?;
    let composite = half_flat_composite(COMPOSITE_SIZE, COMPOSITE_SIZE, COMPOSITE_SEED);
    write(&cfg.out.join("composite.pgm"), &write_pgm(&composite)).map_err(CliError::Fatal)?;

    let images: Vec<Result<GrayImage, String>> = if inputs.is_empty() {
        vec![Ok(composite.clone())]
    } else {
        inputs.par_iter().map(load).collect()
    };
    let ids: Vec<Input> = if inputs.is_empty() {
        vec![Input {
            id: "composite".into(),
            path: cfg.out.join("composite.pgm"),
        }]
    } else {
        inputs
    };

    let mut flags = Vec::new();
    let mut rows = Vec::new();
    for &cost_fn in &cfg.costs {
        let composite_costs = cost_fn
            .compute(&composite)
            .map_err(|e| CliError::Fatal(e.to_string()))?;
        let prepared: Vec<Result<(GrayImage, CostMap), String>> = images
            .par_iter()
            .map(|img| {
                let img = img.clone()?;
                let costs = cost_fn.compute(&img).map_err(|e| e.to_string())?;
                Ok((img, costs))
            })
            .collect();
        for &model in &cfg.models {
            let stats: Vec<Result<(f64, f64, f64), String>> = prepared
                .par_iter()
                .enumerate()
                .map(|(i, p)| {
                    let (img, costs) = p.as_ref().map_err(Clone::clone)?;
                    let m = PayloadSpec::Relative(cfg.alpha)
                        .message_bits(img.len())
                        .map_err(|e| e.to_string())?;
                    let (mut r, _) = embed_with_costs(
                        &[img],
                        vec![costs.clone()],
                        model,
                        m,
                        cfg.seed.wrapping_add(i as u64),
                    )
                    .map_err(|e| e.to_string())?;
                    let r = r.remove(0);
                    Ok((
                        r.expected_entropy,
                        r.expected_distortion,
                        r.realized_change_rate,
                    ))
                })
                .collect();
            let mut sums = (0.0, 0.0, 0.0);
            let mut count = 0;
            for (input, s) in ids.iter().zip(stats) {
                match s {
                    Ok((h, d, c)) => {
                        sums.0 += h;
                        sums.1 += d;
                        sums.2 += c;
                        count += 1;
                    }
                    Err(e) => flags.push(flag(
                        input,
                        format!("{} / {}: {e}", cost_fn.name(), model.name()),
                    )),
                }
            }
            let (log10_mass, fraction) =
                smooth_mass_proxy(&composite, &composite_costs, model, cfg.alpha)
                    .map_err(CliError::Fatal)?;
            let n = count.max(1) as f64;
            rows.push(CompareRow {
                cost: cost_fn.name().into(),
                model: model.name().into(),
                images: count,
                mean_entropy_bits: sums.0 / n,
                mean_expected_distortion: sums.1 / n,
                mean_change_rate: sums.2 / n,
                proxy_smooth_log10_mass: log10_mass,
                proxy_smooth_fraction: fraction,
            });
        }
    }
    let processed = rows.iter().filter(|r| r.images > 0).count();
    let report = fatal(write_report(
        &cfg.out, "compare", cfg.format, &rows, None, &flags,
    ))?;
    finish(processed, flags, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    #[test]
    fn inputs_sorted_by_file_name() {
        let dir = std::env::temp_dir().join(format!("stegdist-inputs-{}", std::process::id()));
        fs::create_dir_all(dir.join("sub")).unwrap();
        for name in ["b.pgm", "a.PGM", "c.txt", "sub/0.pgm"] {
            fs::write(dir.join(name), b"").unwrap();
        }
        let inputs = collect_inputs(&[dir.clone(), PathBuf::from("zz/missing.pgm")]).unwrap();
        let ids: Vec<_> = inputs.iter().map(|i| i.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "missing"]);
        let dup = collect_inputs(&[dir.join("b.pgm"), PathBuf::from("x/b.pgm")]);
        assert!(matches!(dup, Err(CliError::Usage(_))));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn proxy_orders_models_on_composite() {
        let img = half_flat_composite(64, 64, 3);
        let costs = CostFunction::Hill.compute(&img).unwrap();
        let (exp_mass, exp_frac) =
            smooth_mass_proxy(&img, &costs, DistributionModel::Exponential, 0.3).unwrap();
        let (uni_mass, uni_frac) =
            smooth_mass_proxy(&img, &costs, DistributionModel::Uniform, 0.3).unwrap();
        assert!(exp_mass.is_finite());
        assert!((0.0..1e-6).contains(&exp_frac));
        assert_eq!(uni_mass, f64::NEG_INFINITY);
        assert_eq!(uni_frac, 0.0);
    }
}
