//! Command-line surface. Each subcommand loads its inputs, calls one or two
//! library operations and prints JSON (scalars) or writes CSV (matrices).

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Number, Value};

use crate::ensemble::{
    classical_mds, outlier_summary, pairwise_distances, DistanceMatrix, OutlierReport,
};
use crate::entropy::partition_entropy;
use crate::error::{Error, Result};
use crate::fixtures::{named_fixture, CATEGORY_COLUMN, TOTAL_COLUMN};
use crate::ingest::{
    bipartition_by_threshold, load_adjacency, load_adjacency_within, read_assignment, reconcile,
    write_rows, Reconcile, WeightTable,
};
use crate::partition::{LabeledPartition, UnitUniverse};
use crate::scores::{county_split_report, plan_distance, segregation_score};

pub const DEFAULT_PRECISION: u32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "geoentropy",
    version,
    about = "Entropy scores for districting plans"
)]
pub struct Cli {
    /// Decimal places in printed values (1-15).
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    pub precision: u32,

    /// Restrict every input to the units they all share instead of failing
    /// on mismatches.
    #[arg(long, global = true)]
    pub intersect: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    /// Weight CSV (`unit,<col>...`).
    #[arg(long)]
    pub weights: PathBuf,

    /// Column of the weight CSV to use; defaults to the first value column.
    #[arg(long)]
    pub weight_column: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Absolute entropy of one partition.
    Entropy {
        assignment: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// Segregation score Seg(R,T) of a category over tracts.
    Seg {
        /// Weight CSV holding the category and total counts per unit.
        category_table: PathBuf,
        /// Tract assignment of the units; each unit is its own tract if omitted.
        tracts: Option<PathBuf>,
        /// Column with the in-category count of each unit.
        #[arg(long, default_value = CATEGORY_COLUMN)]
        category_column: String,
        /// Column with the total count of each unit.
        #[arg(long, default_value = TOTAL_COLUMN)]
        total_column: String,
    },
    /// County-splitting scores: conditional entropy, splits and pieces.
    CountySplit {
        districts: PathBuf,
        counties: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
        /// Edge list needed for the pieces score.
        #[arg(long)]
        adjacency: Option<PathBuf>,
        /// Let zero-weight units count toward splits.
        #[arg(long)]
        count_zero_weight: bool,
    },
    /// Symmetrized conditional-entropy distance between two plans.
    Distance {
        plan_a: PathBuf,
        plan_b: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// Distance matrix, 2D embedding and outlier ranks for a directory of plans.
    Embed {
        /// Directory of assignment CSVs; each file stem is a plan id.
        plan_dir: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
        /// Plan id to report separately (repeatable).
        #[arg(long = "flag")]
        flagged: Vec<String>,
        /// Output directory for embedding.csv and distances.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one of the built-in fixtures as CSV files.
    Fixtures {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Run a parsed command. JSON goes to `out`, warnings to `warn`.
pub fn run(cli: &Cli, out: &mut dyn Write, warn: &mut dyn Write) -> Result<()> {
    if !(1..=15).contains(&cli.precision) {
        return Err(Error::InvalidPrecision(cli.precision));
    }
    let fmt = Fmt(cli.precision);
    let mode = if cli.intersect {
        Reconcile::Intersect
    } else {
        Reconcile::Strict
    };

    match &cli.command {
        Command::Entropy {
            assignment,
            weights,
        } => {
            let (_, parts) = load_partitions(weights, &[assignment], mode)?;
            let h = partition_entropy(&parts[0]);
            emit(out, json!({ "entropy_bits": fmt.num(h) }))?;
        }
        Command::Seg {
            category_table,
            tracts,
            category_column,
            total_column,
        } => {
            let mut table = WeightTable::read(category_table)?;
            let tract_rows = tracts.as_deref().map(read_assignment).transpose()?;
            if let (Some(rows), Reconcile::Intersect) = (&tract_rows, mode) {
                let keep: std::collections::HashSet<&str> =
                    rows.iter().map(|(u, _)| u.as_str()).collect();
                table = table.restrict(|u| keep.contains(u));
            }
            let units = Arc::new(table.universe(Some(total_column))?);
            let tract_partition = match tract_rows {
                Some(rows) => reconcile(&units, &[rows], mode)?.1.remove(0),
                None => LabeledPartition::from_fn(units.clone(), |_, id| id.to_string()),
            };
            let split = bipartition_by_threshold(&table, category_column, total_column)?;
            let t = split.lift(&tract_partition)?;
            let s = segregation_score(&split.categories, &t)?;
            emit(
                out,
                json!({
                    "seg": fmt.num(s.seg),
                    "ent_conditional": fmt.num(s.ent_conditional),
                    "ent_marginal": fmt.num(s.ent_marginal),
                }),
            )?;
        }
        Command::CountySplit {
            districts,
            counties,
            weights,
            adjacency,
            count_zero_weight,
        } => {
            let (universe, parts) = load_partitions(weights, &[districts, counties], mode)?;
            let graph = match adjacency {
                Some(path) if cli.intersect => Some(load_adjacency_within(path, &universe)?),
                Some(path) => Some(load_adjacency(path, &universe)?),
                None => None,
            };
            let r = county_split_report(&parts[0], &parts[1], graph.as_ref(), *count_zero_weight)?;
            emit(
                out,
                json!({
                    "entropy_bits": fmt.num(r.entropy_score),
                    "splits": r.splits,
                    "pieces": r.pieces,
                }),
            )?;
        }
        Command::Distance {
            plan_a,
            plan_b,
            weights,
        } => {
            let (_, parts) = load_partitions(weights, &[plan_a, plan_b], mode)?;
            let d = plan_distance(&parts[0], &parts[1])?;
            emit(out, json!({ "distance_bits": fmt.num(d) }))?;
        }
        Command::Embed {
            plan_dir,
            weights,
            flagged,
            out: out_dir,
        } => {
            let files = plan_files(plan_dir)?;
            let paths: Vec<&Path> = files.iter().map(|(_, p)| p.as_path()).collect();
            let (_, parts) = load_partitions(weights, &paths, mode)?;
            let plans: Vec<(String, LabeledPartition)> =
                files.into_iter().map(|(id, _)| id).zip(parts).collect();
            let dm = pairwise_distances(&plans)?;
            let flagged_idx = flagged
                .iter()
                .map(|name| {
                    dm.index_of(name)
                        .ok_or_else(|| Error::UnknownPlan { name: name.clone() })
                })
                .collect::<Result<Vec<_>>>()?;
            let embedding = classical_mds(&dm);
            let report = outlier_summary(&dm, &flagged_idx)?;
            if embedding.degenerate {
                writeln!(
                    warn,
                    "warning: DegenerateMatrix: all plan distances are zero; every point is at the origin"
                )
                .map_err(|e| Error::io("<stderr>", e))?;
            }

            std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
            let embedding_path = out_dir.join("embedding.csv");
            write_rows(
                &embedding_path,
                &embedding_rows(&fmt, &embedding.coordinates, &report),
            )?;
            let distances_path = out_dir.join("distances.csv");
            write_rows(&distances_path, &distance_rows(&fmt, &dm))?;

            let flagged: Vec<Value> = report
                .flagged
                .iter()
                .map(|e| {
                    json!({
                        "plan_id": e.plan_id,
                        "mean_distance": fmt.num(e.mean_distance),
                        "rank": e.rank,
                    })
                })
                .collect();
            emit(
                out,
                json!({
                    "plans": dm.n(),
                    "eigenvalues": [fmt.num(embedding.eigenvalues[0]), fmt.num(embedding.eigenvalues[1])],
                    "negative_eigenvalues": embedding.negative_eigenvalues,
                    "degenerate": embedding.degenerate,
                    "flagged": flagged,
                }),
            )?;
        }
        Command::Fixtures { name, out: out_dir } => {
            let fixture = named_fixture(name)?;
            let files = fixture.write(out_dir)?;
            let names: Vec<&str> = files
                .iter()
                .filter_map(|p| p.file_name().and_then(|f| f.to_str()))
                .collect();
            emit(out, json!({ "fixture": fixture.name, "files": names }))?;
        }
    }
    Ok(())
}

fn load_partitions<P: AsRef<Path>>(
    weights: &WeightArgs,
    assignments: &[P],
    mode: Reconcile,
) -> Result<(Arc<UnitUniverse>, Vec<LabeledPartition>)> {
    let universe =
        WeightTable::read(&weights.weights)?.universe(weights.weight_column.as_deref())?;
    let rows = assignments
        .iter()
        .map(|p| read_assignment(p.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    reconcile(&universe, &rows, mode)
}

/// `*.csv` files of `dir`, sorted by file name, keyed by file stem.
fn plan_files(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "csv") {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            files.push((stem, path));
        }
    }
    files.sort();
    Ok(files)
}

fn embedding_rows(fmt: &Fmt, coordinates: &[[f64; 2]], report: &OutlierReport) -> Vec<Vec<String>> {
    let header = ["plan_id", "x", "y", "mean_distance", "rank"];
    let mut rows = vec![header.map(String::from).to_vec()];
    for (c, e) in coordinates.iter().zip(&report.plans) {
        rows.push(vec![
            e.plan_id.clone(),
            fmt.num(c[0]).to_string(),
            fmt.num(c[1]).to_string(),
            fmt.num(e.mean_distance).to_string(),
            e.rank.to_string(),
        ]);
    }
    rows
}

fn distance_rows(fmt: &Fmt, dm: &DistanceMatrix) -> Vec<Vec<String>> {
    let mut header = vec!["plan_id".to_string()];
    header.extend(dm.plan_ids().iter().cloned());
    let mut rows = vec![header];
    for (a, id) in dm.plan_ids().iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend(dm.row(a).iter().map(|&d| fmt.num(d).to_string()));
        rows.push(row);
    }
    rows
}

struct Fmt(u32);

impl Fmt {
    fn num(&self, x: f64) -> Number {
        format_fixed(x, self.0)
            .parse()
            .expect("fixed-point decimal is valid JSON")
    }
}

/// `x` rounded half-to-even to `precision` decimals and printed with
/// exactly that many digits. Negative zero prints as zero.
pub fn format_fixed(x: f64, precision: u32) -> String {
    let scale = 10f64.powi(precision as i32);
    let rounded = (x * scale).round_ties_even() / scale;
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{:.*}", precision as usize, rounded)
}

/// Single-line JSON with a space after each `:` and `,`.
struct SpacedFormatter;

impl serde_json::ser::Formatter for SpacedFormatter {
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if first {
            Ok(())
        } else {
            w.write_all(b", ")
        }
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.begin_array_value(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }
}

fn emit(out: &mut dyn Write, value: Value) -> Result<()> {
    let stdout_err = |e| Error::io("<stdout>", e);
    let mut ser = serde_json::Serializer::with_formatter(&mut *out, SpacedFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| stdout_err(e.into()))?;
    writeln!(out).map_err(stdout_err)
}
