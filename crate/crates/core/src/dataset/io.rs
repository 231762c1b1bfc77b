//! Dense CSV, sparse record, and similarity-matrix file formats.
//!
//! All loaders accept gzip-compressed input when the path ends in `.gz` and
//! skip lines starting with `#`.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use flate2::read::GzDecoder;

use super::{FeatureVector, LabeledDataset, SparseVector};
use crate::error::{Error, Result};
use crate::similarity::{SimilarityMatrix, SimilarityMeasure};

/// Which CSV column holds the cluster label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Name("label".into())
    }
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

fn open(path: &Path) -> Result<Box<dyn Read>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(GzDecoder::new(file)))
    } else {
        Ok(Box::new(file))
    }
}

fn dataset_name(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = name.strip_suffix(".gz").unwrap_or(&name);
    match name.rsplit_once('.') {
        Some((stem, _)) if !stem.is_empty() => stem.to_string(),
        _ => name.to_string(),
    }
}

fn parse_real(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Loads a dense CSV with a header row. Item `i` is data row `i`.
pub fn load_dense_csv(path: impl AsRef<Path>, label_column: &LabelColumn) -> Result<LabeledDataset> {
    let path = path.as_ref();
    load_dense_csv_from_reader(open(path)?, path, label_column)
}

pub fn load_dense_csv_from_reader<R: Read>(
    reader: R,
    source: impl AsRef<Path>,
    label_column: &LabelColumn,
) -> Result<LabeledDataset> {
    let source = source.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(source, 1, e.to_string()))?
        .clone();
    let arity = headers.len();
    let label_idx = match label_column {
        LabelColumn::Index(i) if *i < arity => *i,
        LabelColumn::Index(i) => {
            return Err(Error::Config(format!(
                "label column {i} out of range ({arity} columns)"
            )))
        }
        LabelColumn::Name(name) => headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Config(format!("missing label column {name:?}")))?,
    };

    let mut items = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(source, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != arity {
            return Err(Error::parse(
                source,
                line,
                format!("expected {arity} fields, found {}", record.len()),
            ));
        }
        let mut values = Vec::with_capacity(arity - 1);
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                continue;
            }
            let v = parse_real(cell).ok_or_else(|| {
                Error::parse(source, line, format!("non-numeric cell {cell:?} in column {col}"))
            })?;
            values.push(v);
        }
        items.push(FeatureVector::Dense(values));
        labels.push(record[label_idx].trim().to_string());
    }
    if items.is_empty() {
        return Err(Error::format(source, "no data rows"));
    }
    LabeledDataset::new(dataset_name(source), None, items, labels)
}

/// Writes a dense dataset as CSV: columns `f0..f{d-1}` followed by `label`.
pub fn write_dense_csv<W: Write>(ds: &LabeledDataset, out: W) -> Result<()> {
    let dim = ds
        .dim()
        .ok_or_else(|| Error::Type("dense CSV output needs a dense dataset".into()))?;
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::Domain(format!("CSV write failed: {e}"));
    let mut header: Vec<String> = (0..dim).map(|i| format!("f{i}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(to_err)?;
    for (item, label) in ds.items().iter().zip(ds.labels()) {
        let mut row: Vec<String> = item.as_dense()?.iter().map(|v| v.to_string()).collect();
        row.push(label.clone());
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush()
        .map_err(|e| Error::Domain(format!("CSV write failed: {e}")))?;
    Ok(())
}

/// Loads `id<TAB>label<TAB>idx:val idx:val ...` records, one per line.
pub fn load_sparse_records(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    load_sparse_records_from_reader(open(path)?, path)
}

pub fn load_sparse_records_from_reader<R: Read>(
    reader: R,
    source: impl AsRef<Path>,
) -> Result<LabeledDataset> {
    let source = source.as_ref();
    let mut ids = Vec::new();
    let mut items = Vec::new();
    let mut labels = Vec::new();
    for (n, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = n + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let id = fields.next().unwrap_or_default();
        let label = fields
            .next()
            .ok_or_else(|| Error::parse(source, lineno, "expected id<TAB>label<TAB>pairs"))?;
        let pairs = fields.next().unwrap_or("");
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for tok in pairs.split_whitespace() {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| Error::parse(source, lineno, format!("bad pair {tok:?}")))?;
            let idx: u32 = idx
                .parse()
                .map_err(|_| Error::parse(source, lineno, format!("bad index in {tok:?}")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| Error::parse(source, lineno, format!("bad value in {tok:?}")))?;
            indices.push(idx);
            values.push(val);
        }
        let v = SparseVector::new(indices, values)
            .map_err(|e| Error::parse(source, lineno, strip_domain(e)))?;
        ids.push(id.to_string());
        labels.push(label.to_string());
        items.push(FeatureVector::Sparse(v));
    }
    if items.is_empty() {
        return Err(Error::format(source, "no data rows"));
    }
    LabeledDataset::new(dataset_name(source), Some(ids), items, labels)
}

fn strip_domain(e: Error) -> String {
    match e {
        Error::Domain(msg) => msg,
        other => other.to_string(),
    }
}

pub fn write_sparse_records<W: Write>(ds: &LabeledDataset, mut out: W) -> Result<()> {
    let io_err = |e| Error::io("<sparse output>", e);
    for ((id, item), label) in ds.ids().iter().zip(ds.items()).zip(ds.labels()) {
        let FeatureVector::Sparse(v) = item else {
            return Err(Error::Type(format!(
                "sparse output needs sparse items, got {}",
                item.kind()
            )));
        };
        let pairs: Vec<String> = v.iter().map(|(i, x)| format!("{i}:{x}")).collect();
        writeln!(out, "{id}\t{label}\t{}", pairs.join(" ")).map_err(io_err)?;
    }
    Ok(())
}

/// Loads a similarity matrix file: `n`, then `n` rows of `n` reals, then `n`
/// lines of `id<TAB>label`.
pub fn load_similarity_matrix(
    path: impl AsRef<Path>,
) -> Result<(LabeledDataset, SimilarityMeasure)> {
    let path = path.as_ref();
    load_similarity_matrix_from_reader(open(path)?, path)
}

pub fn load_similarity_matrix_from_reader<R: Read>(
    reader: R,
    source: impl AsRef<Path>,
) -> Result<(LabeledDataset, SimilarityMeasure)> {
    let source = source.as_ref();
    let mut lines = BufReader::new(reader)
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            l.as_ref()
                .map_or(true, |s| !s.trim().is_empty() && !s.starts_with('#'))
        });
    let mut next_line = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l)),
            Some((_, Err(e))) => Err(Error::io(source, e)),
            None => Err(Error::format(source, format!("unexpected end of file, expected {what}"))),
        }
    };

    let (lineno, header) = next_line("matrix size")?;
    let n: usize = header
        .trim()
        .parse()
        .map_err(|_| Error::parse(source, lineno, format!("bad matrix size {header:?}")))?;
    if n == 0 {
        return Err(Error::format(source, "no data rows"));
    }
    let mut values = Vec::with_capacity(n * n);
    for _ in 0..n {
        let (lineno, row) = next_line("matrix row")?;
        let before = values.len();
        for tok in row.split_whitespace() {
            let v = parse_real(tok)
                .ok_or_else(|| Error::parse(source, lineno, format!("bad similarity {tok:?}")))?;
            values.push(v);
        }
        if values.len() - before != n {
            return Err(Error::format(
                source,
                format!(
                    "matrix not square: line {lineno} has {} entries, expected {n}",
                    values.len() - before
                ),
            ));
        }
    }
    let mut ids = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let (lineno, l) = next_line("id<TAB>label")?;
        let (id, label) = l
            .split_once('\t')
            .ok_or_else(|| match parse_real(l.split_whitespace().next().unwrap_or("")) {
                Some(_) => Error::format(source, format!("matrix not square: extra row at line {lineno}")),
                None => Error::parse(source, lineno, "expected id<TAB>label"),
            })?;
        ids.push(id.to_string());
        labels.push(label.trim_end().to_string());
    }
    if let Some((lineno, _)) = lines.next() {
        return Err(Error::parse(source, lineno, "trailing content after labels"));
    }
    let matrix = SimilarityMatrix::new(n, values)?;
    let items = (0..n).map(FeatureVector::Opaque).collect();
    let ds = LabeledDataset::new(dataset_name(source), Some(ids), items, labels)?;
    Ok((ds, SimilarityMeasure::Matrix(Arc::new(matrix))))
}

/// Writes `ds` (opaque items indexing `matrix`) in the similarity-matrix format.
pub fn write_similarity_matrix<W: Write>(
    ds: &LabeledDataset,
    matrix: &SimilarityMatrix,
    mut out: W,
) -> Result<()> {
    let io_err = |e| Error::io("<matrix output>", e);
    let handles: Vec<usize> = ds
        .items()
        .iter()
        .map(|item| match item {
            FeatureVector::Opaque(h) if *h < matrix.len() => Ok(*h),
            other => Err(Error::Type(format!(
                "matrix output needs opaque handles into the matrix, got {}",
                other.kind()
            ))),
        })
        .collect::<Result<_>>()?;
    writeln!(out, "{}", handles.len()).map_err(io_err)?;
    for &i in &handles {
        let row: Vec<String> = handles.iter().map(|&j| matrix.get(i, j).to_string()).collect();
        writeln!(out, "{}", row.join(" ")).map_err(io_err)?;
    }
    for (id, label) in ds.ids().iter().zip(ds.labels()) {
        writeln!(out, "{id}\t{label}").map_err(io_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ItemId;
    use proptest::prelude::*;

    fn csv(text: &str) -> Result<LabeledDataset> {
        load_dense_csv_from_reader(text.as_bytes(), "mem.csv", &LabelColumn::default())
    }

    #[test]
    fn dense_csv_three_rows() {
        let ds = csv("x,y,label\n0,0,a\n1,0,a\n0,1,b").unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dim(), Some(2));
        assert_eq!(ds.labels(), ["a", "a", "b"]);
        assert_eq!(ds.item(ItemId(1)), &FeatureVector::Dense(vec![1.0, 0.0]));
    }

    #[test]
    fn dense_csv_label_column_by_index() {
        let ds = load_dense_csv_from_reader(
            "label,x\na,1\nb,2\n".as_bytes(),
            "mem.csv",
            &LabelColumn::Index(0),
        )
        .unwrap();
        assert_eq!(ds.labels(), ["a", "b"]);
        assert_eq!(ds.item(ItemId(1)), &FeatureVector::Dense(vec![2.0]));
    }

    #[test]
    fn dense_csv_header_only() {
        let err = csv("x,y,label\n").unwrap_err();
        assert!(err.to_string().contains("no data rows"), "{err}");
    }

    #[test]
    fn dense_csv_reports_row_numbers() {
        let err = csv("x,y,label\n0,0,a\n1,zz,a\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
        let err = csv("x,y,label\n0,0,a\n1,a\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = csv("x,y,label\n0,inf,a\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn dense_csv_missing_label_column() {
        let err = load_dense_csv_from_reader(
            "x,y\n0,0\n".as_bytes(),
            "mem.csv",
            &LabelColumn::Name("class".into()),
        )
        .unwrap_err();
        assert!(err.is_config());
    }

    #[test]
    fn sparse_records() {
        let ds = load_sparse_records_from_reader(
            "d1\tsci.space\t2:0.5 7:1\nd2\trec.autos\t1:2\n".as_bytes(),
            "mem.tsv",
        )
        .unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.external_id(ItemId(0)), "d1");
        match ds.item(ItemId(0)) {
            FeatureVector::Sparse(v) => {
                assert_eq!(v.nnz(), 2);
                assert_eq!(v.indices(), &[2, 7]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(ds.label(ItemId(0)), "sci.space");
    }

    #[test]
    fn sparse_records_reject_bad_input() {
        let err =
            load_sparse_records_from_reader("d1\tsci\t7:1.0 2:0.5\n".as_bytes(), "m").unwrap_err();
        assert!(err.to_string().contains("indices not sorted"), "{err}");
        let err = load_sparse_records_from_reader("d1\tsci\t2:1 2:3\n".as_bytes(), "m").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = load_sparse_records_from_reader("d1\tsci\t2:NaN\n".as_bytes(), "m").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = load_sparse_records_from_reader("d1\tsci\t2:inf\n".as_bytes(), "m").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn similarity_matrix_two_by_two() {
        let (ds, measure) = load_similarity_matrix_from_reader(
            "2\n1 0.3\n0.3 1\nh1\ta\nh2\tb\n".as_bytes(),
            "m.txt",
        )
        .unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.labels(), ["a", "b"]);
        let v = measure
            .compare(ds.item(ItemId(0)), ds.item(ItemId(1)))
            .unwrap();
        assert_eq!(v, 0.3);
    }

    #[test]
    fn similarity_matrix_not_square() {
        // 3 rows of 2 entries
        let err = load_similarity_matrix_from_reader(
            "3\n1 0.3\n0.3 1\n0.2 0.2\na\tx\nb\tx\nc\tx\n".as_bytes(),
            "m.txt",
        )
        .unwrap_err();
        assert!(err.to_string().contains("matrix not square"), "{err}");
        // header says 2, but 3 rows follow
        let err = load_similarity_matrix_from_reader(
            "2\n1 0.3 0.2\n0.3 1 0.2\n0.2 0.2 1\na\tx\nb\tx\n".as_bytes(),
            "m.txt",
        )
        .unwrap_err();
        assert!(err.to_string().contains("matrix not square"), "{err}");
    }

    fn roundtrip_dense(ds: &LabeledDataset) -> LabeledDataset {
        let mut buf = Vec::new();
        write_dense_csv(ds, &mut buf).unwrap();
        load_dense_csv_from_reader(buf.as_slice(), "rt.csv", &LabelColumn::default()).unwrap()
    }

    proptest! {
        #[test]
        fn dense_csv_is_lossless(
            rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 1..20),
            labels in prop::collection::vec("[a-z]{1,4}", 20),
        ) {
            let n = rows.len();
            let ds = LabeledDataset::new(
                "rt",
                None,
                rows.into_iter().map(FeatureVector::Dense).collect(),
                labels[..n].to_vec(),
            ).unwrap();
            let back = roundtrip_dense(&ds);
            prop_assert_eq!(back.items(), ds.items());
            prop_assert_eq!(back.labels(), ds.labels());
        }

        #[test]
        fn sparse_records_are_lossless(
            rows in prop::collection::vec(
                prop::collection::btree_map(0u32..500, 1e-3f64..1e3, 1..12), 1..10),
        ) {
            let items: Vec<_> = rows
                .iter()
                .map(|m| FeatureVector::Sparse(
                    SparseVector::new(m.keys().copied().collect(), m.values().copied().collect()).unwrap()))
                .collect();
            let labels = (0..items.len()).map(|i| format!("c{}", i % 3)).collect();
            let ds = LabeledDataset::new("rt", None, items, labels).unwrap();
            let mut buf = Vec::new();
            write_sparse_records(&ds, &mut buf).unwrap();
            let back = load_sparse_records_from_reader(buf.as_slice(), "rt").unwrap();
            prop_assert_eq!(back.items(), ds.items());
            prop_assert_eq!(back.labels(), ds.labels());
            prop_assert_eq!(back.ids(), ds.ids());
        }
    }

    #[test]
    fn similarity_matrix_roundtrip() {
        let text = "3\n1 0.25 -0.5\n0.25 1 0.125\n-0.5 0.125 1\nx\tA\ny\tB\nz\tA\n";
        let (ds, measure) = load_similarity_matrix_from_reader(text.as_bytes(), "m").unwrap();
        let SimilarityMeasure::Matrix(m) = &measure else {
            panic!("expected matrix measure")
        };
        let mut buf = Vec::new();
        write_similarity_matrix(&ds, m, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
    }

    #[test]
    fn name_strips_extensions() {
        assert_eq!(dataset_name(Path::new("/a/fashion.csv.gz")), "fashion");
        assert_eq!(dataset_name(Path::new("blobs.csv")), "blobs");
    }
}
