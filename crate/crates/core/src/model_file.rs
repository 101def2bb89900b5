//! Model files.
//!
//! TOML with four sections. Matrices are lists of `"x y value"` triplets;
//! entries not listed are zero and symmetric matrices must list both
//! orientations.
//!
//! ```toml
//! [lattice]
//! sites = 3
//! hopping = ["0 1 1.0", "1 0 1.0", "1 2 1.0", "2 1 1.0"]
//! # or: generator = "chain", extent = [3], t = 1.0
//!
//! [coulomb]
//! u = "inf"            # or a number
//! offsite = ["0 2 0.5", "2 0 0.5"]
//!
//! [phonon]
//! omega = 1.0
//! cutoff = 2
//! coupling = ["0 0 0.5", "1 1 0.5", "2 2 0.5"]
//!
//! [radiation]
//! L = 4.0
//! kappa = 2.0
//! m0 = 1.0
//! cutoff = 2
//! positions = ["-1 0 0", "0 0 0", "1 0 0"]
//! ```

use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{
    default_positions, generate_lattice, LatticeKind, LatticeModel, OnsiteU, PhononParams, RadiationParams,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    lattice: LatticeSection,
    coulomb: Option<CoulombSection>,
    phonon: Option<PhononSection>,
    radiation: Option<RadiationSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeSection {
    sites: Option<usize>,
    generator: Option<String>,
    extent: Option<Vec<usize>>,
    t: Option<f64>,
    hopping: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum UValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoulombSection {
    u: Option<UValue>,
    offsite: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhononSection {
    omega: f64,
    cutoff: usize,
    #[serde(default)]
    coupling: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadiationSection {
    #[serde(rename = "L")]
    box_length: f64,
    kappa: f64,
    m0: f64,
    cutoff: usize,
    positions: Option<Vec<String>>,
    #[serde(default)]
    prune_decoupled: bool,
}

/// Read and validate a model file.
pub fn load_model(path: impl AsRef<Path>) -> Result<LatticeModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.display().to_string()),
        _ => Error::Io { path: path.display().to_string(), source: e },
    })?;
    parse_model(&text)
}

pub fn parse_model(text: &str) -> Result<LatticeModel> {
    let file: ModelFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let lat = file.lattice;

    let hopping = match (&lat.generator, &lat.hopping) {
        (Some(_), Some(_)) => return Err(Error::Parse("[lattice] takes either generator or hopping, not both".into())),
        (Some(name), None) => {
            let kind: LatticeKind = name.parse()?;
            let extent = match (&lat.extent, lat.sites) {
                (Some(e), _) => e.clone(),
                (None, Some(n)) => vec![n],
                (None, None) => return Err(Error::Parse("[lattice] generator needs extent".into())),
            };
            let m = generate_lattice(kind, &extent, lat.t.unwrap_or(1.0))?;
            if let Some(n) = lat.sites {
                if n != m.nrows() {
                    return Err(Error::Parse(format!(
                        "sites = {n} does not match generator extent ({} sites)",
                        m.nrows()
                    )));
                }
            }
            m
        }
        (None, Some(rows)) => {
            let n = lat.sites.ok_or_else(|| Error::Parse("[lattice] explicit hopping needs sites".into()))?;
            triplet_matrix(n, rows, "hopping")?
        }
        (None, None) => return Err(Error::Parse("[lattice] needs generator or hopping".into())),
    };
    let n = hopping.nrows();
    let mut model = LatticeModel::new(hopping)?;

    if let Some(c) = file.coulomb {
        let u = match c.u {
            None => OnsiteU::Infinite,
            Some(UValue::Number(v)) => OnsiteU::Finite(v),
            Some(UValue::Text(s)) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinite" | "infinity" => OnsiteU::Infinite,
                other => OnsiteU::Finite(
                    other.parse().map_err(|_| Error::Parse(format!("[coulomb] u: cannot parse '{s}'")))?,
                ),
            },
        };
        model = model.with_onsite_u(u)?;
        if let Some(rows) = c.offsite {
            model = model.with_offsite_u(triplet_matrix(n, &rows, "offsite")?)?;
        }
    }
    if let Some(p) = file.phonon {
        model = model.with_phonon(PhononParams {
            coupling: triplet_matrix(n, &p.coupling, "coupling")?,
            omega: p.omega,
            cutoff: p.cutoff,
        })?;
    }
    if let Some(r) = file.radiation {
        let positions = match r.positions {
            Some(rows) => rows.iter().map(|s| parse_position(s)).collect::<Result<Vec<_>>>()?,
            None => default_positions(n),
        };
        model = model.with_radiation(RadiationParams {
            box_length: r.box_length,
            uv_cutoff: r.kappa,
            mass: r.m0,
            cutoff: r.cutoff,
            positions,
            prune_decoupled: r.prune_decoupled,
        })?;
    }
    Ok(model)
}

fn triplet_matrix(n: usize, rows: &[String], what: &str) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(n, n);
    let mut seen = vec![false; n * n];
    for row in rows {
        let parts: Vec<&str> = row.split_whitespace().collect();
        let [x, y, v] = parts[..] else {
            return Err(Error::Parse(format!("{what}: expected \"x y value\", got '{row}'")));
        };
        let parse_idx = |s: &str| -> Result<usize> {
            let i: usize = s.parse().map_err(|_| Error::Parse(format!("{what}: bad site index '{s}' in '{row}'")))?;
            if i >= n {
                return Err(Error::Parse(format!("{what}: site {i} out of range in '{row}'")));
            }
            Ok(i)
        };
        let (x, y) = (parse_idx(x)?, parse_idx(y)?);
        let v: f64 = v.parse().map_err(|_| Error::Parse(format!("{what}: bad value in '{row}'")))?;
        if std::mem::replace(&mut seen[x * n + y], true) {
            return Err(Error::Parse(format!("{what}: duplicate entry ({x},{y})")));
        }
        m[(x, y)] = v;
    }
    Ok(m)
}

fn parse_position(s: &str) -> Result<[f64; 3]> {
    let vals: Vec<f64> = s
        .split_whitespace()
        .map(|p| p.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse(format!("position: cannot parse '{s}'")))?;
    let [a, b, c] = vals[..] else {
        return Err(Error::Parse(format!("position: expected three coordinates, got '{s}'")));
    };
    Ok([a, b, c])
}
