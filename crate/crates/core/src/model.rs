//! Lattice models: hopping, Coulomb, phonon and radiation parameters.
//!
//! A [`LatticeModel`] is validated on construction and immutable afterwards.
//! The electron number is always one less than the number of sites.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest lattice handled. Occupation words of the full Fock space use two
/// bits per site and must fit in a `u64`.
pub const MAX_SITES: usize = 24;

const SYMMETRY_TOL: f64 = 1e-12;

/// On-site Coulomb strength. The infinite value is symbolic: the U = inf theory
/// is built directly in the projected hole-spin basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum OnsiteU {
    Finite(f64),
    #[serde(serialize_with = "ser_inf")]
    Infinite,
}

fn ser_inf<S: serde::Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str("inf")
}

impl OnsiteU {
    pub fn is_infinite(&self) -> bool {
        matches!(self, OnsiteU::Infinite)
    }
}

/// Dispersionless phonons, one mode per site.
#[derive(Debug, Clone, PartialEq)]
pub struct PhononParams {
    /// Electron-phonon coupling `g_xy`, symmetric.
    pub coupling: DMatrix<f64>,
    pub omega: f64,
    /// Per-site occupation cutoff of the truncated boson space.
    pub cutoff: usize,
}

/// Quantized radiation field in the box `[-L/2, L/2]^3`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationParams {
    pub box_length: f64,
    pub uv_cutoff: f64,
    /// Dispersion of the `k = 0` modes.
    pub mass: f64,
    /// Per-mode photon occupation cutoff.
    pub cutoff: usize,
    pub positions: Vec<[f64; 3]>,
    /// Drop modes whose polarization is orthogonal to every bond. Such modes
    /// only add an uncoupled oscillator ladder.
    pub prune_decoupled: bool,
}

impl RadiationParams {
    /// Parameters with sites placed on integer points of the x axis, centred
    /// at the origin.
    pub fn on_line(sites: usize, box_length: f64, uv_cutoff: f64, mass: f64, cutoff: usize) -> Self {
        RadiationParams {
            box_length,
            uv_cutoff,
            mass,
            cutoff,
            positions: default_positions(sites),
            prune_decoupled: false,
        }
    }
}

pub fn default_positions(sites: usize) -> Vec<[f64; 3]> {
    let offset = (sites as f64 - 1.0) / 2.0;
    (0..sites).map(|i| [i as f64 - offset, 0.0, 0.0]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModel {
    sites: usize,
    hopping: DMatrix<f64>,
    onsite_u: OnsiteU,
    offsite_u: DMatrix<f64>,
    phonon: Option<PhononParams>,
    radiation: Option<RadiationParams>,
}

impl LatticeModel {
    /// Pure Hubbard model at U = inf with no off-site Coulomb repulsion.
    pub fn new(hopping: DMatrix<f64>) -> Result<Self> {
        let sites = hopping.nrows();
        let model = LatticeModel {
            sites,
            offsite_u: DMatrix::zeros(sites, sites),
            hopping,
            onsite_u: OnsiteU::Infinite,
            phonon: None,
            radiation: None,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_onsite_u(mut self, u: OnsiteU) -> Result<Self> {
        self.onsite_u = u;
        self.validate()?;
        Ok(self)
    }

    pub fn with_offsite_u(mut self, offsite: DMatrix<f64>) -> Result<Self> {
        self.offsite_u = offsite;
        self.validate()?;
        Ok(self)
    }

    pub fn with_phonon(mut self, phonon: PhononParams) -> Result<Self> {
        self.phonon = Some(phonon);
        self.validate()?;
        Ok(self)
    }

    pub fn with_radiation(mut self, radiation: RadiationParams) -> Result<Self> {
        self.radiation = Some(radiation);
        self.validate()?;
        Ok(self)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// N = |Lambda| - 1.
    pub fn electrons(&self) -> usize {
        self.sites - 1
    }

    pub fn hopping(&self) -> &DMatrix<f64> {
        &self.hopping
    }

    pub fn t(&self, x: usize, y: usize) -> f64 {
        self.hopping[(x, y)]
    }

    pub fn onsite_u(&self) -> OnsiteU {
        self.onsite_u
    }

    pub fn offsite_u(&self) -> &DMatrix<f64> {
        &self.offsite_u
    }

    pub fn phonon(&self) -> Option<&PhononParams> {
        self.phonon.as_ref()
    }

    pub fn radiation(&self) -> Option<&RadiationParams> {
        self.radiation.as_ref()
    }

    /// Ordered pairs `(x, y)`, `x != y`, with nonzero hopping.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.sites;
        let mut out = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if x != y && self.hopping[(x, y)] != 0.0 {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Copy of the model with sites relabelled: new site `perm[x]` is old site `x`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.sites;
        if perm.len() != n {
            return Err(Error::InvalidInput("permutation length mismatch".into()));
        }
        let remap = |m: &DMatrix<f64>| {
            let mut out = DMatrix::zeros(n, n);
            for x in 0..n {
                for y in 0..n {
                    out[(perm[x], perm[y])] = m[(x, y)];
                }
            }
            out
        };
        let mut model = self.clone();
        model.hopping = remap(&self.hopping);
        model.offsite_u = remap(&self.offsite_u);
        if let Some(ph) = &mut model.phonon {
            ph.coupling = remap(&self.phonon.as_ref().unwrap().coupling);
        }
        if let Some(rad) = &mut model.radiation {
            let old = &self.radiation.as_ref().unwrap().positions;
            for x in 0..n {
                rad.positions[perm[x]] = old[x];
            }
        }
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.sites;
        if n < 2 {
            return Err(Error::validation("A.3", format!("at sites = {n}: need at least 2 sites")));
        }
        if n > MAX_SITES {
            return Err(Error::InvalidInput(format!("{n} sites exceeds the supported maximum {MAX_SITES}")));
        }
        check_square(&self.hopping, n, "hopping")?;
        check_square(&self.offsite_u, n, "offsite_u")?;
        check_finite(&self.hopping, "hopping")?;
        check_finite(&self.offsite_u, "offsite_u")?;
        check_symmetric(&self.hopping, "A.1")?;
        for x in 0..n {
            for y in 0..n {
                if self.hopping[(x, y)] < 0.0 {
                    return Err(Error::validation("A.2", format!("at ({x},{y}): t = {} < 0", self.hopping[(x, y)])));
                }
            }
        }
        check_symmetric(&self.offsite_u, "A.1")?;
        if let OnsiteU::Finite(u) = self.onsite_u {
            if !(u.is_finite() && u >= 0.0) {
                return Err(Error::validation("U >= 0", format!("at U = {u}")));
            }
        }
        if let Some(ph) = &self.phonon {
            check_square(&ph.coupling, n, "phonon coupling")?;
            check_finite(&ph.coupling, "phonon coupling")?;
            check_symmetric(&ph.coupling, "A.4")?;
            if !(ph.omega.is_finite() && ph.omega > 0.0) {
                return Err(Error::validation("omega > 0", format!("at omega = {}", ph.omega)));
            }
        }
        if let Some(rad) = &self.radiation {
            for (name, v) in [("L", rad.box_length), ("kappa", rad.uv_cutoff), ("m0", rad.mass)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::validation(&format!("{name} > 0"), format!("at {name} = {v}")));
                }
            }
            if rad.positions.len() != n {
                return Err(Error::validation(
                    "radiation positions",
                    format!("(expected {n} positions, got {})", rad.positions.len()),
                ));
            }
            let half = rad.box_length / 2.0;
            for (x, p) in rad.positions.iter().enumerate() {
                if p.iter().any(|c| !c.is_finite() || c.abs() > half) {
                    return Err(Error::validation(
                        "site inside V",
                        format!("at site {x}: position {p:?} outside [-L/2, L/2]^3"),
                    ));
                }
            }
            for x in 0..n {
                for y in (x + 1)..n {
                    if self.hopping[(x, y)] != 0.0 && rad.positions[x] == rad.positions[y] {
                        return Err(Error::validation(
                            "distinct bond endpoints",
                            format!("at ({x},{y}): coincident positions"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_square(m: &DMatrix<f64>, n: usize, what: &str) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::InvalidInput(format!("{what} matrix is {}x{}, expected {n}x{n}", m.nrows(), m.ncols())));
    }
    Ok(())
}

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("{what} has non-finite entries")));
    }
    Ok(())
}

fn check_symmetric(m: &DMatrix<f64>, condition: &str) -> Result<()> {
    let n = m.nrows();
    for x in 0..n {
        for y in (x + 1)..n {
            let (a, b) = (m[(x, y)], m[(y, x)]);
            if (a - b).abs() > SYMMETRY_TOL * (1.0 + a.abs().max(b.abs())) {
                return Err(Error::validation(condition, format!("at ({x},{y}): {a} != {b}")));
            }
        }
    }
    Ok(())
}

/// Named hopping graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    Chain,
    Ring,
    Complete,
    SquarePatch,
    TriangularPatch,
}

impl std::str::FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(LatticeKind::Chain),
            "ring" => Ok(LatticeKind::Ring),
            "complete" => Ok(LatticeKind::Complete),
            "square_patch" => Ok(LatticeKind::SquarePatch),
            "triangular_patch" => Ok(LatticeKind::TriangularPatch),
            other => Err(Error::Parse(format!("unknown lattice generator '{other}'"))),
        }
    }
}

/// Hopping matrix with `t` on the nearest-neighbour pairs of the named graph.
///
/// Patches are indexed row-major, site `(i, j)` at `i + width * j`. The
/// triangular patch adds the `(i+1, j-1)` diagonal to the square patch.
pub fn generate_lattice(kind: LatticeKind, extent: &[usize], t: f64) -> Result<DMatrix<f64>> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidInput(format!("hopping amplitude must be positive, got {t}")));
    }
    let bad = || Error::InvalidInput(format!("unsupported extent {extent:?} for {kind:?}"));
    let mut edges = Vec::new();
    let n = match kind {
        LatticeKind::Chain | LatticeKind::Ring | LatticeKind::Complete => {
            let &[n] = extent else { return Err(bad()) };
            if n < 2 {
                return Err(bad());
            }
            match kind {
                LatticeKind::Chain => edges.extend((0..n - 1).map(|i| (i, i + 1))),
                LatticeKind::Ring => {
                    if n < 3 {
                        return Err(bad());
                    }
                    edges.extend((0..n).map(|i| (i, (i + 1) % n)));
                }
                _ => {
                    for i in 0..n {
                        edges.extend((i + 1..n).map(|j| (i, j)));
                    }
                }
            }
            n
        }
        LatticeKind::SquarePatch | LatticeKind::TriangularPatch => {
            let &[w, h] = extent else { return Err(bad()) };
            if w == 0 || h == 0 || w * h < 2 {
                return Err(bad());
            }
            let idx = |i: usize, j: usize| i + w * j;
            for j in 0..h {
                for i in 0..w {
                    if i + 1 < w {
                        edges.push((idx(i, j), idx(i + 1, j)));
                    }
                    if j + 1 < h {
                        edges.push((idx(i, j), idx(i, j + 1)));
                    }
                    if kind == LatticeKind::TriangularPatch && i + 1 < w && j >= 1 {
                        edges.push((idx(i, j), idx(i + 1, j - 1)));
                    }
                }
            }
            w * h
        }
    };
    if n > MAX_SITES {
        return Err(bad());
    }
    let mut m = DMatrix::zeros(n, n);
    for (a, b) in edges {
        m[(a, b)] = t;
        m[(b, a)] = t;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph() {
        let m = generate_lattice(LatticeKind::Complete, &[4], 1.0).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(m[(x, y)], if x == y { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn chain_of_three() {
        let m = generate_lattice(LatticeKind::Chain, &[3], 1.0).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[0., 1., 0., 1., 0., 1., 0., 1., 0.]);
        assert_eq!(m, expected);
    }

    #[test]
    fn square_patch_is_four_cycle() {
        let m = generate_lattice(LatticeKind::SquarePatch, &[2, 2], 1.0).unwrap();
        let ring = generate_lattice(LatticeKind::Ring, &[4], 1.0).unwrap();
        // sites 0,1,3,2 go around the plaquette
        let perm = [0usize, 1, 3, 2];
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(m[(perm[a], perm[b])], ring[(a, b)]);
            }
        }
        for x in 0..4 {
            assert_eq!(m.row(x).iter().filter(|&&v| v == 1.0).count(), 2);
        }
    }

    #[test]
    fn triangular_patch_adds_one_diagonal() {
        let m = generate_lattice(LatticeKind::TriangularPatch, &[2, 2], 1.0).unwrap();
        assert_eq!(m.iter().filter(|&&v| v == 1.0).count(), 10);
        assert_eq!(m[(1, 2)], 1.0);
        assert_eq!(m[(0, 3)], 0.0);
    }

    #[test]
    fn generated_matrices_validate() {
        let cases: [(LatticeKind, &[usize]); 6] = [
            (LatticeKind::Chain, &[5]),
            (LatticeKind::Ring, &[6]),
            (LatticeKind::Complete, &[5]),
            (LatticeKind::SquarePatch, &[3, 2]),
            (LatticeKind::TriangularPatch, &[3, 3]),
            (LatticeKind::SquarePatch, &[1, 4]),
        ];
        for (kind, extent) in cases {
            let m = generate_lattice(kind, extent, 0.7).unwrap();
            assert_eq!(m, generate_lattice(kind, extent, 0.7).unwrap());
            LatticeModel::new(m).unwrap();
        }
    }

    #[test]
    fn unsupported_extents() {
        assert!(generate_lattice(LatticeKind::Chain, &[2, 2], 1.0).is_err());
        assert!(generate_lattice(LatticeKind::Ring, &[2], 1.0).is_err());
        assert!(generate_lattice(LatticeKind::SquarePatch, &[3], 1.0).is_err());
        assert!(generate_lattice(LatticeKind::Complete, &[1], 1.0).is_err());
        assert!(generate_lattice(LatticeKind::Complete, &[3], -1.0).is_err());
    }

    #[test]
    fn negative_hopping_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0., -1., -1., 0.]);
        let err = LatticeModel::new(m).unwrap_err().to_string();
        assert!(err.starts_with("A.2"), "{err}");
    }

    #[test]
    fn asymmetric_hopping_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0., 1., 0.5, 0.]);
        let err = LatticeModel::new(m).unwrap_err().to_string();
        assert!(err.starts_with("A.1"), "{err}");
    }

    #[test]
    fn asymmetric_coupling_rejected() {
        let t = generate_lattice(LatticeKind::Chain, &[2], 1.0).unwrap();
        let g = DMatrix::from_row_slice(2, 2, &[0., 1., 0., 0.]);
        let err = LatticeModel::new(t)
            .unwrap()
            .with_phonon(PhononParams { coupling: g, omega: 1.0, cutoff: 2 })
            .unwrap_err()
            .to_string();
        assert!(err.starts_with("A.4"), "{err}");
    }

    #[test]
    fn positions_must_lie_in_box() {
        let t = generate_lattice(LatticeKind::Chain, &[3], 1.0).unwrap();
        let model = LatticeModel::new(t).unwrap();
        let rad = RadiationParams::on_line(3, 1.5, 1.0, 1.0, 1);
        assert!(model.clone().with_radiation(rad).is_err());
        let rad = RadiationParams::on_line(3, 2.0, 1.0, 1.0, 1);
        assert!(model.with_radiation(rad).is_ok());
    }
}
