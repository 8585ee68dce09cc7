//! CSV ingestion and reconciliation of unit-level data.
//!
//! Three plain CSV formats, all UTF-8 with a header row:
//!
//! * assignments: `unit,label`, one row per unit
//! * weights: `unit,<col>...`, decimal numbers with `.` as separator
//! * adjacency: `unit_a,unit_b`, one undirected edge per row

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::partition::{LabeledPartition, UnitUniverse};
use crate::scores::AdjacencyGraph;

pub const ASSIGNMENT_HEADER: [&str; 2] = ["unit", "label"];
pub const ADJACENCY_HEADER: [&str; 2] = ["unit_a", "unit_b"];

/// Label given to the in-category pseudo-unit of a bipartition.
pub const IN_CATEGORY: &str = "in";
pub const OUT_CATEGORY: &str = "out";

/// How to treat units present in one input but not another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reconcile {
    /// Any mismatch is an error.
    #[default]
    Strict,
    /// Keep only units present in every input.
    Intersect,
}

/// Named nonnegative value columns per unit.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    columns: Vec<String>,
    units: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl WeightTable {
    pub fn new(columns: Vec<String>, rows: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut units = Vec::with_capacity(rows.len());
        let mut values = Vec::with_capacity(rows.len());
        for (unit, vals) in rows {
            if vals.len() != columns.len() {
                return Err(Error::MalformedRow {
                    path: "<table>".into(),
                    line: units.len() as u64 + 2,
                    reason: format!("expected {} values", columns.len()),
                });
            }
            for &v in &vals {
                if !v.is_finite() {
                    return Err(Error::NonFiniteWeight { unit });
                }
                if v < 0.0 {
                    return Err(Error::NegativeWeight { unit, weight: v });
                }
            }
            if !seen.insert(unit.clone()) {
                return Err(Error::DuplicateUnit { unit });
            }
            units.push(unit);
            values.push(vals);
        }
        Ok(WeightTable {
            columns,
            units,
            rows: values,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    pub fn from_reader<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut csv = csv_reader(reader);
        let header = header(&mut csv, source)?;
        if header.first().map(String::as_str) != Some("unit") || header.len() < 2 {
            return Err(malformed(source, 1, "expected header unit,<column>..."));
        }
        let columns = header[1..].to_vec();
        let mut rows = Vec::new();
        for record in csv.records() {
            let record = record.map_err(|e| csv_error(source, e))?;
            let line = line_of(&record);
            let unit = field(&record, 0, source, line)?;
            let mut vals = Vec::with_capacity(columns.len());
            for k in 1..record.len() {
                let raw = field(&record, k, source, line)?;
                let v: f64 = raw.parse().map_err(|_| {
                    malformed(source, line, &format!("{raw:?} is not a decimal number"))
                })?;
                vals.push(v);
            }
            rows.push((unit, vals));
        }
        Self::new(columns, rows)
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MissingColumn {
                column: name.to_string(),
            })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Universe weighted by `column`, or by the first value column when
    /// `column` is `None`.
    pub fn universe(&self, column: Option<&str>) -> Result<UnitUniverse> {
        let k = match column {
            Some(name) => self.column_index(name)?,
            None => 0,
        };
        UnitUniverse::new(
            self.units
                .iter()
                .zip(&self.rows)
                .map(|(u, r)| (u.as_str(), r[k])),
        )
    }

    /// Rows whose unit passes `keep`, order preserved.
    pub fn restrict(&self, mut keep: impl FnMut(&str) -> bool) -> WeightTable {
        let (units, rows) = self
            .units
            .iter()
            .zip(&self.rows)
            .filter(|(u, _)| keep(u))
            .map(|(u, r)| (u.clone(), r.clone()))
            .unzip();
        WeightTable {
            columns: self.columns.clone(),
            units,
            rows,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        let mut header = vec!["unit".to_string()];
        header.extend(self.columns.iter().cloned());
        write_record(&mut w, path, &header)?;
        for (unit, row) in self.units.iter().zip(&self.rows) {
            let mut rec = vec![unit.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            write_record(&mut w, path, &rec)?;
        }
        flush(w, path)
    }
}

/// Read the weight CSV at `path` into a universe weighted by
/// `weight_column` (first value column if `None`).
pub fn load_weights(path: &Path, weight_column: Option<&str>) -> Result<UnitUniverse> {
    WeightTable::read(path)?.universe(weight_column)
}

/// Raw `(unit, label)` rows of an assignment CSV. Duplicate units are
/// rejected here; membership is checked against a universe later.
pub fn read_assignment(path: &Path) -> Result<Vec<(String, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_assignment_from(file, &path.display().to_string())
}

pub fn read_assignment_from<R: Read>(reader: R, source: &str) -> Result<Vec<(String, String)>> {
    read_pairs(reader, source, ASSIGNMENT_HEADER, true)
}

/// Load an assignment CSV as a partition of `universe`, strictly: every
/// universe unit must be labeled once and no other units may appear.
pub fn load_assignment(path: &Path, universe: &Arc<UnitUniverse>) -> Result<LabeledPartition> {
    LabeledPartition::from_assignments(universe.clone(), read_assignment(path)?)
}

pub fn write_assignment(path: &Path, partition: &LabeledPartition) -> Result<()> {
    let mut w = csv_writer(path)?;
    write_record(&mut w, path, &ASSIGNMENT_HEADER)?;
    for (unit, label) in partition.assignments() {
        write_record(&mut w, path, &[unit, label])?;
    }
    flush(w, path)
}

pub fn read_adjacency(path: &Path) -> Result<Vec<(String, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_pairs(file, &path.display().to_string(), ADJACENCY_HEADER, false)
}

/// Load an edge list; unknown endpoints and self-loops are errors, repeated
/// edges in either direction collapse to one.
pub fn load_adjacency(path: &Path, universe: &Arc<UnitUniverse>) -> Result<AdjacencyGraph> {
    AdjacencyGraph::from_pairs(universe.clone(), read_adjacency(path)?)
}

/// Like [`load_adjacency`], but edges touching units outside `universe`
/// are dropped instead of rejected.
pub fn load_adjacency_within(path: &Path, universe: &Arc<UnitUniverse>) -> Result<AdjacencyGraph> {
    let pairs = read_adjacency(path)?
        .into_iter()
        .filter(|(a, b)| universe.contains(a) && universe.contains(b));
    AdjacencyGraph::from_pairs(universe.clone(), pairs)
}

pub fn write_adjacency(path: &Path, graph: &AdjacencyGraph) -> Result<()> {
    let mut w = csv_writer(path)?;
    write_record(&mut w, path, &ADJACENCY_HEADER)?;
    for (a, b) in graph.id_pairs() {
        write_record(&mut w, path, &[a, b])?;
    }
    flush(w, path)
}

/// Turn raw assignment rows into partitions over a common universe.
///
/// `Strict` requires every row set to label exactly the units of
/// `universe`. `Intersect` first restricts the universe to units present in
/// all inputs, then drops rows outside it.
pub fn reconcile(
    universe: &UnitUniverse,
    assignments: &[Vec<(String, String)>],
    mode: Reconcile,
) -> Result<(Arc<UnitUniverse>, Vec<LabeledPartition>)> {
    let universe = match mode {
        Reconcile::Strict => Arc::new(universe.clone()),
        Reconcile::Intersect => {
            let sets: Vec<HashSet<&str>> = assignments
                .iter()
                .map(|rows| rows.iter().map(|(u, _)| u.as_str()).collect())
                .collect();
            Arc::new(universe.restrict(|id| sets.iter().all(|s| s.contains(id)))?)
        }
    };
    let partitions = assignments
        .iter()
        .map(|rows| {
            let pairs = rows
                .iter()
                .filter(|(u, _)| mode == Reconcile::Strict || universe.contains(u))
                .map(|(u, l)| (u.as_str(), l.clone()));
            LabeledPartition::from_assignments(universe.clone(), pairs)
        })
        .collect::<Result<_>>()?;
    Ok((universe, partitions))
}

/// A demographic bipartition realized on pseudo-units: each unit `u` is
/// split into `u#in` (the category count) and `u#out` (the remainder).
#[derive(Debug, Clone)]
pub struct Bipartition {
    pub universe: Arc<UnitUniverse>,
    /// Labels every pseudo-unit [`IN_CATEGORY`] or [`OUT_CATEGORY`].
    pub categories: LabeledPartition,
    source_units: Vec<String>,
}

impl Bipartition {
    /// Carry a partition of the original units onto the pseudo-units: both
    /// halves of `u` get `u`'s label.
    pub fn lift(&self, t: &LabeledPartition) -> Result<LabeledPartition> {
        let source = t.universe();
        if source.len() != self.source_units.len() {
            return Err(Error::UniverseMismatch);
        }
        let mut labels = Vec::with_capacity(self.universe.len());
        for unit in &self.source_units {
            let i = source
                .index_of(unit)
                .ok_or_else(|| Error::MissingLabel { unit: unit.clone() })?;
            let label = t.label_of(i);
            labels.push(label);
            labels.push(label);
        }
        LabeledPartition::new(self.universe.clone(), labels)
    }

    /// Units the pseudo-units were split from, in table order.
    pub fn source_units(&self) -> &[String] {
        &self.source_units
    }
}

/// Split each unit of `w` by whether residents are in the category counted
/// by `category_column` out of `total_column`. Total weight is conserved.
pub fn bipartition_by_threshold(
    w: &WeightTable,
    category_column: &str,
    total_column: &str,
) -> Result<Bipartition> {
    let category = w.column(category_column)?;
    let total = w.column(total_column)?;
    let mut units = Vec::with_capacity(2 * w.len());
    let mut labels = Vec::with_capacity(2 * w.len());
    for ((unit, &cat), &tot) in w.units().iter().zip(&category).zip(&total) {
        if cat > tot {
            return Err(Error::CategoryExceedsTotal {
                unit: unit.clone(),
                category: cat,
                total: tot,
            });
        }
        units.push((format!("{unit}#{IN_CATEGORY}"), cat));
        units.push((format!("{unit}#{OUT_CATEGORY}"), tot - cat));
        labels.push(IN_CATEGORY);
        labels.push(OUT_CATEGORY);
    }
    let universe = Arc::new(UnitUniverse::new(units)?);
    let categories = LabeledPartition::new(universe.clone(), labels)?;
    Ok(Bipartition {
        universe,
        categories,
        source_units: w.units().to_vec(),
    })
}

fn read_pairs<R: Read>(
    reader: R,
    source: &str,
    expected: [&str; 2],
    unique_first: bool,
) -> Result<Vec<(String, String)>> {
    let mut csv = csv_reader(reader);
    let header = header(&mut csv, source)?;
    if header != expected {
        return Err(malformed(
            source,
            1,
            &format!("expected header {}", expected.join(",")),
        ));
    }
    let mut seen: HashSet<String> = HashSet::new();
    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| csv_error(source, e))?;
        let line = line_of(&record);
        let a = field(&record, 0, source, line)?;
        let b = field(&record, 1, source, line)?;
        if unique_first && !seen.insert(a.clone()) {
            return Err(Error::DuplicateUnit { unit: a });
        }
        rows.push((a, b));
    }
    Ok(rows)
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn header<R: Read>(csv: &mut csv::Reader<R>, source: &str) -> Result<Vec<String>> {
    let h = csv.headers().map_err(|e| csv_error(source, e))?;
    let mut cols: Vec<String> = h.iter().map(str::to_string).collect();
    if let Some(first) = cols.first_mut() {
        // tolerate a UTF-8 byte-order mark
        *first = first.trim_start_matches('\u{feff}').to_string();
    }
    if cols.iter().all(String::is_empty) {
        return Err(malformed(source, 1, "missing header"));
    }
    Ok(cols)
}

fn field(record: &csv::StringRecord, k: usize, source: &str, line: u64) -> Result<String> {
    match record.get(k) {
        Some(v) if !v.is_empty() => Ok(v.to_string()),
        _ => Err(malformed(source, line, &format!("empty field {}", k + 1))),
    }
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn malformed(source: &str, line: u64, reason: &str) -> Error {
    Error::MalformedRow {
        path: source.to_string(),
        line,
        reason: reason.to_string(),
    }
}

fn csv_error(source: &str, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(source, io),
        kind => malformed(source, line, &format!("{kind:?}")),
    }
}

/// Write `rows` (header first) as one CSV file.
pub(crate) fn write_rows(path: &Path, rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in rows {
        write_record(&mut w, path, row)?;
    }
    flush(w, path)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().from_writer(file))
}

fn write_record<W: Write, S: AsRef<[u8]>>(
    w: &mut csv::Writer<W>,
    path: &Path,
    record: &[S],
) -> Result<()> {
    w.write_record(record).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::io(path, std::io::Error::other(format!("{kind:?}"))),
    })
}

fn flush<W: Write>(mut w: csv::Writer<W>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(text: &str) -> Result<Vec<(String, String)>> {
        read_assignment_from(text.as_bytes(), "test.csv")
    }

    fn abc() -> Arc<UnitUniverse> {
        Arc::new(UnitUniverse::new([("u1", 1.0), ("u2", 2.0), ("u3", 3.0)]).unwrap())
    }

    #[test]
    fn assignment_roundtrip() {
        let r = rows("unit,label\nu1,A\nu2,A\nu3,B\n").unwrap();
        let p = LabeledPartition::from_assignments(abc(), r).unwrap();
        assert_eq!(p.label_names(), ["A", "B"]);
        assert_eq!(p.codes(), [0, 0, 1]);
    }

    #[test]
    fn assignment_errors() {
        assert!(matches!(
            rows("unit,label\nu1,A\nu1,B\n"),
            Err(Error::DuplicateUnit { unit }) if unit == "u1"
        ));
        let missing =
            LabeledPartition::from_assignments(abc(), rows("unit,label\nu1,A\nu2,A\n").unwrap());
        assert!(matches!(missing, Err(Error::MissingLabel { unit }) if unit == "u3"));
        assert!(matches!(
            rows("unit,district\nu1,A\n"),
            Err(Error::MalformedRow { line: 1, .. })
        ));
        assert!(matches!(
            rows("unit,label\nu1,A,extra\n"),
            Err(Error::MalformedRow { .. })
        ));
        assert!(matches!(
            rows("unit,label\nu1,\n"),
            Err(Error::MalformedRow { line: 2, .. })
        ));
    }

    #[test]
    fn weights_parsing() {
        let t = WeightTable::from_reader("unit,pop,vap\na,1,0.5\nb,2,1\nc,3,2\n".as_bytes(), "w")
            .unwrap();
        assert_eq!(t.universe(Some("pop")).unwrap().total_weight(), 6.0);
        assert_eq!(t.universe(None).unwrap().total_weight(), 6.0);
        assert_eq!(t.universe(Some("vap")).unwrap().total_weight(), 3.5);
        assert!(
            matches!(t.universe(Some("nope")), Err(Error::MissingColumn { column }) if column == "nope")
        );

        let zero = WeightTable::from_reader("unit,pop\na,0\nb,0\n".as_bytes(), "w").unwrap();
        assert!(matches!(zero.universe(None), Err(Error::ZeroTotalWeight)));

        assert!(matches!(
            WeightTable::from_reader("unit,pop\na,1\nb,-1\n".as_bytes(), "w"),
            Err(Error::NegativeWeight { unit, .. }) if unit == "b"
        ));
        assert!(matches!(
            WeightTable::from_reader("unit,pop\na,1,5\n".as_bytes(), "w"),
            Err(Error::MalformedRow { .. })
        ));
        assert!(matches!(
            WeightTable::from_reader("unit,pop\na,1e\n".as_bytes(), "w"),
            Err(Error::MalformedRow { line: 2, .. })
        ));
        assert!(matches!(
            WeightTable::from_reader("unit,pop\na,NaN\n".as_bytes(), "w"),
            Err(Error::NonFiniteWeight { .. })
        ));
    }

    #[test]
    fn reconcile_intersect() {
        let u = UnitUniverse::new([("a", 1.0), ("b", 1.0), ("c", 1.0), ("d", 1.0)]).unwrap();
        let first = vec![
            ("a".into(), "X".into()),
            ("b".into(), "Y".into()),
            ("c".into(), "Y".into()),
            ("z".into(), "Q".into()),
        ];
        let second = vec![
            ("b".into(), "P".into()),
            ("c".into(), "Q".into()),
            ("a".into(), "P".into()),
        ];
        assert!(reconcile(&u, &[first.clone(), second.clone()], Reconcile::Strict).is_err());
        let (v, parts) = reconcile(&u, &[first, second], Reconcile::Intersect).unwrap();
        assert_eq!(v.ids(), ["a", "b", "c"]);
        assert_eq!(parts[0].label_names(), ["X", "Y"]);
        assert_eq!(parts[1].label_names(), ["P", "Q"]);
    }

    #[test]
    fn bipartition_splits_units() {
        let t = WeightTable::new(
            vec!["black".into(), "total".into()],
            vec![
                ("t1".into(), vec![25.0, 100.0]),
                ("t2".into(), vec![0.0, 50.0]),
            ],
        )
        .unwrap();
        let b = bipartition_by_threshold(&t, "black", "total").unwrap();
        assert_eq!(b.universe.ids(), ["t1#in", "t1#out", "t2#in", "t2#out"]);
        assert_eq!(b.universe.weights(), [25.0, 75.0, 0.0, 50.0]);
        assert_eq!(b.universe.total_weight(), 150.0);
        assert_eq!(b.categories.label_names(), ["in", "out"]);

        let units = Arc::new(t.universe(Some("total")).unwrap());
        let tracts = LabeledPartition::new(units, ["north", "south"]).unwrap();
        let lifted = b.lift(&tracts).unwrap();
        assert_eq!(lifted.codes(), [0, 0, 1, 1]);

        let bad = WeightTable::new(
            vec!["cat".into(), "total".into()],
            vec![("t1".into(), vec![101.0, 100.0])],
        )
        .unwrap();
        assert!(matches!(
            bipartition_by_threshold(&bad, "cat", "total"),
            Err(Error::CategoryExceedsTotal { unit, .. }) if unit == "t1"
        ));
    }

    #[test]
    fn files_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = LabeledPartition::new(abc(), ["A", "B", "A"]).unwrap();
        let path = dir.path().join("a.csv");
        write_assignment(&path, &p).unwrap();
        let back = load_assignment(&path, &abc()).unwrap();
        let mut original: Vec<_> = p.assignments().collect();
        let mut reread: Vec<_> = back.assignments().collect();
        original.sort();
        reread.sort();
        assert_eq!(original, reread);

        let g = AdjacencyGraph::from_pairs(abc(), [("u1", "u2"), ("u3", "u2")]).unwrap();
        let gpath = dir.path().join("adj.csv");
        write_adjacency(&gpath, &g).unwrap();
        assert_eq!(load_adjacency(&gpath, &abc()).unwrap().edges(), g.edges());

        let w = WeightTable::new(
            vec!["pop".into()],
            vec![("x".into(), vec![1.5]), ("y".into(), vec![2.0])],
        )
        .unwrap();
        let wpath = dir.path().join("w.csv");
        w.write(&wpath).unwrap();
        assert_eq!(WeightTable::read(&wpath).unwrap(), w);
    }

    #[test]
    fn adjacency_file_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("adj.csv");
        std::fs::write(&path, "unit_a,unit_b\nu1,u2\nu2,u1\n").unwrap();
        assert_eq!(load_adjacency(&path, &abc()).unwrap().num_edges(), 1);
        std::fs::write(&path, "unit_a,unit_b\nu1,u1\n").unwrap();
        assert!(matches!(
            load_adjacency(&path, &abc()),
            Err(Error::SelfLoop { .. })
        ));
        std::fs::write(&path, "unit_a,unit_b\nu1,u7\n").unwrap();
        assert!(matches!(
            load_adjacency(&path, &abc()),
            Err(Error::UnknownUnit { .. })
        ));
        assert_eq!(load_adjacency_within(&path, &abc()).unwrap().num_edges(), 0);
    }
}
