//! Report rows and their CSV / JSON serialization.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::config::Format;

/// A row type with a fixed CSV header.
pub trait Table: Serialize {
    const HEADER: &'static [&'static str];
}

/// One line per processed image.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub image: String,
    pub lambda: f64,
    pub entropy_bits: f64,
    pub expected_distortion: f64,
    pub change_rate: f64,
    /// Fraction of the group payload carried by this image.
    pub entropy_share: f64,
    pub group_id: usize,
    pub wall_ms: u64,
}

impl Table for ReportRow {
    const HEADER: &'static [&'static str] = &[
        "image",
        "lambda",
        "entropy_bits",
        "expected_distortion",
        "change_rate",
        "entropy_share",
        "group_id",
        "wall_ms",
    ];
}

/// One line per embedding group.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupRow {
    pub group_id: usize,
    pub images: usize,
    pub lambda: f64,
    pub total_payload_bits: f64,
    pub share_sum_bits: f64,
    pub members: String,
}

impl Table for GroupRow {
    const HEADER: &'static [&'static str] = &[
        "group_id",
        "images",
        "lambda",
        "total_payload_bits",
        "share_sum_bits",
        "members",
    ];
}

/// An input that could not be processed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlagRow {
    pub image: String,
    pub error: String,
}

impl Table for FlagRow {
    const HEADER: &'static [&'static str] = &["image", "error"];
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityRow {
    pub image: String,
    pub width: usize,
    pub height: usize,
    pub wet_pixels: usize,
    pub capacity_bits: f64,
    pub capacity_bpp: f64,
}

impl Table for CapacityRow {
    const HEADER: &'static [&'static str] = &[
        "image",
        "width",
        "height",
        "wet_pixels",
        "capacity_bits",
        "capacity_bpp",
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostRow {
    pub image: String,
    pub width: usize,
    pub height: usize,
    pub wet_pixels: usize,
    pub min_cost: f64,
    pub max_dry_cost: f64,
}

impl Table for CostRow {
    const HEADER: &'static [&'static str] = &[
        "image",
        "width",
        "height",
        "wet_pixels",
        "min_cost",
        "max_dry_cost",
    ];
}

/// Averages for one (cost, model) pair. Columns prefixed `proxy_` are
/// measured on the built-in half-flat composite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub cost: String,
    pub model: String,
    pub images: usize,
    pub mean_entropy_bits: f64,
    pub mean_expected_distortion: f64,
    pub mean_change_rate: f64,
    pub proxy_smooth_log10_mass: f64,
    pub proxy_smooth_fraction: f64,
}

impl Table for CompareRow {
    const HEADER: &'static [&'static str] = &[
        "cost",
        "model",
        "images",
        "mean_entropy_bits",
        "mean_expected_distortion",
        "mean_change_rate",
        "proxy_smooth_log10_mass",
        "proxy_smooth_fraction",
    ];
}

pub fn csv_bytes<T: Table>(rows: &[T]) -> io::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(T::HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

pub fn write_csv<T: Table>(path: &Path, rows: &[T]) -> io::Result<()> {
    fs::write(path, csv_bytes(rows)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes)
}

#[derive(Serialize)]
struct Bundle<'a, R: Serialize> {
    rows: &'a [R],
    #[serde(skip_serializing_if = "Option::is_none")]
    groups: Option<&'a [GroupRow]>,
    flags: &'a [FlagRow],
}

/// Writes `<stem>.csv` (+ `groups.csv`, `flags.csv`) or a single `<stem>.json`.
/// Returns the path of the main report.
pub fn write_report<T: Table>(
    dir: &Path,
    stem: &str,
    format: Format,
    rows: &[T],
    groups: Option<&[GroupRow]>,
    flags: &[FlagRow],
) -> io::Result<std::path::PathBuf> {
    match format {
        Format::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            write_csv(&path, rows)?;
            if let Some(groups) = groups {
                write_csv(&dir.join("groups.csv"), groups)?;
            }
            write_csv(&dir.join("flags.csv"), flags)?;
            Ok(path)
        }
        Format::Json => {
            let path = dir.join(format!("{stem}.json"));
            write_json(
                &path,
                &Bundle {
                    rows,
                    groups,
                    flags,
                },
            )?;
            Ok(path)
        }
    }
}
