//! Cluster prototypes and their tab-separated serialization.
//!
//! One record per cluster:
//! `label<TAB>epsilon<TAB>k<TAB>tau<TAB>covered_fraction<TAB>id,id,...`
//! with `-` for parameters that do not apply to the method. Lines starting
//! with `#` are comments.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::select::CrsParams;
use crate::dataset::ItemId;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Crs,
    DeltaMedoids,
    Random,
    Full,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Crs => "crs",
            Method::DeltaMedoids => "delta-medoids",
            Method::Random => "random",
            Method::Full => "full",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crs" => Ok(Method::Crs),
            "delta-medoids" => Ok(Method::DeltaMedoids),
            "random" => Ok(Method::Random),
            "full" => Ok(Method::Full),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

/// Parameters a prototype was built with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrototypeParams {
    pub method: Method,
    pub k: Option<usize>,
    pub epsilon: Option<f64>,
    /// Resolved pruning threshold (CRS) or coverage threshold (δ-medoids).
    pub tau: Option<f64>,
    pub fraction: Option<f64>,
    pub seed: Option<u64>,
}

impl PrototypeParams {
    pub fn crs(p: &CrsParams, tau: f64) -> Self {
        PrototypeParams {
            method: Method::Crs,
            k: Some(p.k),
            epsilon: Some(p.epsilon),
            tau: (!tau.is_nan()).then_some(tau),
            fraction: None,
            seed: Some(p.seed),
        }
    }

    pub fn bare(method: Method) -> Self {
        PrototypeParams {
            method,
            k: None,
            epsilon: None,
            tau: None,
            fraction: None,
            seed: None,
        }
    }
}

/// A subset of one cluster's members standing in for the whole cluster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prototype {
    pub label: String,
    /// In selection order.
    pub representatives: Vec<ItemId>,
    pub covered_fraction: f64,
    pub params: PrototypeParams,
}

impl Prototype {
    pub fn new(
        label: impl Into<String>,
        representatives: Vec<ItemId>,
        covered_fraction: f64,
        params: PrototypeParams,
    ) -> Self {
        Prototype {
            label: label.into(),
            representatives,
            covered_fraction,
            params,
        }
    }

    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    /// The record line, without a trailing newline.
    pub fn to_record(&self) -> Result<String> {
        if self.label.contains(['\t', '\n']) {
            return Err(Error::Domain(format!(
                "label {:?} cannot be written to a tab-separated record",
                self.label
            )));
        }
        let ids: Vec<String> = self.representatives.iter().map(|r| r.to_string()).collect();
        Ok(format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.label,
            opt(self.params.epsilon),
            opt(self.params.k),
            opt(self.params.tau),
            self.covered_fraction,
            ids.join(",")
        ))
    }

    /// Parses a record line; the method is not part of the record and must
    /// be supplied.
    pub fn from_record(line: &str, method: Method) -> std::result::Result<Self, String> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(format!("expected 6 tab-separated fields, found {}", fields.len()));
        }
        let epsilon = parse_opt::<f64>(fields[1], "epsilon")?;
        let k = parse_opt::<usize>(fields[2], "k")?;
        let tau = parse_opt::<f64>(fields[3], "tau")?;
        let covered_fraction: f64 = fields[4]
            .parse()
            .map_err(|_| format!("bad covered fraction {:?}", fields[4]))?;
        let representatives = if fields[5].is_empty() {
            Vec::new()
        } else {
            fields[5]
                .split(',')
                .map(|s| s.parse::<u32>().map(ItemId).map_err(|_| format!("bad id {s:?}")))
                .collect::<std::result::Result<_, _>>()?
        };
        Ok(Prototype {
            label: fields[0].to_string(),
            representatives,
            covered_fraction,
            params: PrototypeParams {
                method,
                k,
                epsilon,
                tau,
                fraction: None,
                seed: None,
            },
        })
    }
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn parse_opt<T: FromStr>(s: &str, what: &str) -> std::result::Result<Option<T>, String> {
    if s == "-" {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| format!("bad {what} {s:?}"))
}

/// Writes prototype records, preceded by `# ` comment lines.
pub fn write_prototypes<W: Write>(
    protos: &[Prototype],
    comments: &[String],
    mut out: W,
) -> Result<()> {
    let io = |e| Error::io("<prototypes>", e);
    for c in comments {
        writeln!(out, "# {c}").map_err(io)?;
    }
    for p in protos {
        writeln!(out, "{}", p.to_record()?).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_prototypes(path: impl AsRef<Path>, method: Method) -> Result<Vec<Prototype>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_prototypes_from_reader(file, path, method)
}

pub fn read_prototypes_from_reader<R: Read>(
    reader: R,
    source: &Path,
    method: Method,
) -> Result<Vec<Prototype>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(Prototype::from_record(&line, method).map_err(|m| Error::parse(source, i + 1, m))?);
    }
    Ok(out)
}
