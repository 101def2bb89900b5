//! Hole-spin configurations with a single hole, hole moves, and the
//! configuration graph of a magnetization sector.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::LatticeModel;

/// Half-integer magnetization `M`, stored as `2M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Magnetization(i32);

impl Magnetization {
    pub fn from_twice(twice: i32) -> Self {
        Magnetization(twice)
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Largest magnetization with `sites - 1` electrons.
    pub fn max_for(sites: usize) -> Self {
        Magnetization(sites as i32 - 1)
    }

    /// All sectors, ascending.
    pub fn all(sites: usize) -> Vec<Self> {
        let n = sites as i32 - 1;
        (0..=n).map(|k| Magnetization(-n + 2 * k)).collect()
    }

    pub fn lowered(self) -> Self {
        Magnetization(self.0 - 2)
    }

    pub fn raised(self) -> Self {
        Magnetization(self.0 + 2)
    }

    pub fn flipped(self) -> Self {
        Magnetization(-self.0)
    }

    pub fn is_valid_for(self, sites: usize) -> bool {
        let n = sites as i32 - 1;
        self.0.abs() <= n && (self.0 - n) % 2 == 0
    }

    /// Number of up spins among the `sites - 1` electrons.
    pub fn up_count(self, sites: usize) -> usize {
        ((sites as i32 - 1 + self.0) / 2) as usize
    }
}

impl fmt::Display for Magnetization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for Magnetization {
    type Err = Error;

    /// Accepts `3/2`, `-1/2`, `1`, `0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("cannot parse magnetization '{s}'"));
        if let Some((num, den)) = s.split_once('/') {
            if den.trim() != "2" {
                return Err(bad());
            }
            let twice: i32 = num.trim().parse().map_err(|_| bad())?;
            return Ok(Magnetization(twice));
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        let twice = 2.0 * v;
        if (twice - twice.round()).abs() > 1e-9 || !twice.is_finite() {
            return Err(bad());
        }
        Ok(Magnetization(twice.round() as i32))
    }
}

impl Serialize for Magnetization {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

/// One hole at `hole`, up spins on `up_mask`, down spins on the remaining sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HoleSpinConfig {
    hole: usize,
    up_mask: u64,
}

impl HoleSpinConfig {
    pub fn new(hole: usize, up_mask: u64) -> Result<Self> {
        if up_mask & (1 << hole) != 0 {
            return Err(Error::InvalidInput(format!("up mask {up_mask:#b} occupies the hole at {hole}")));
        }
        Ok(HoleSpinConfig { hole, up_mask })
    }

    pub fn hole(&self) -> usize {
        self.hole
    }

    pub fn up_mask(&self) -> u64 {
        self.up_mask
    }

    pub fn down_mask(&self, sites: usize) -> u64 {
        let all = (1u64 << sites) - 1;
        all & !self.up_mask & !(1 << self.hole)
    }

    pub fn is_up(&self, site: usize) -> bool {
        self.up_mask & (1 << site) != 0
    }

    /// Electron occupation `n_x` (0 at the hole, 1 elsewhere).
    pub fn occupation(&self, site: usize) -> f64 {
        if site == self.hole {
            0.0
        } else {
            1.0
        }
    }

    pub fn n_up(&self) -> usize {
        self.up_mask.count_ones() as usize
    }

    /// Compact rendering such as `u0d` (up, hole, down).
    pub fn render(&self, sites: usize) -> String {
        (0..sites)
            .map(|x| {
                if x == self.hole {
                    '0'
                } else if self.is_up(x) {
                    'u'
                } else {
                    'd'
                }
            })
            .collect()
    }
}

/// Move the hole from `from` to `to`, carrying the spin at `to` back to
/// `from`. `None` when the hole is not at `from`.
pub fn apply_move(c: HoleSpinConfig, from: usize, to: usize) -> Option<HoleSpinConfig> {
    debug_assert_ne!(from, to);
    if c.hole != from {
        return None;
    }
    let mut up = c.up_mask;
    if up & (1 << to) != 0 {
        up &= !(1 << to);
        up |= 1 << from;
    }
    Some(HoleSpinConfig { hole: to, up_mask: up })
}

/// Canonically ordered hole-spin configurations of one magnetization sector.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    sites: usize,
    m: Magnetization,
    configs: Vec<HoleSpinConfig>,
    index: HashMap<HoleSpinConfig, usize>,
}

impl SectorBasis {
    pub fn new(sites: usize, m: Magnetization) -> Result<Self> {
        if !m.is_valid_for(sites) {
            return Err(Error::MagnetizationOutOfRange { m: m.to_string(), sites });
        }
        let n_up = m.up_count(sites);
        let mut configs = Vec::new();
        for hole in 0..sites {
            let others: Vec<usize> = (0..sites).filter(|&x| x != hole).collect();
            let mut masks: Vec<u64> = subsets(&others, n_up);
            masks.sort_unstable();
            configs.extend(masks.into_iter().map(|up_mask| HoleSpinConfig { hole, up_mask }));
        }
        let index = configs.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        Ok(SectorBasis { sites, m, configs, index })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn magnetization(&self) -> Magnetization {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn configs(&self) -> &[HoleSpinConfig] {
        &self.configs
    }

    pub fn config(&self, i: usize) -> HoleSpinConfig {
        self.configs[i]
    }

    pub fn index_of(&self, c: &HoleSpinConfig) -> Option<usize> {
        self.index.get(c).copied()
    }
}

/// Bit masks over `sites` choosing `k` of them.
fn subsets(sites: &[usize], k: usize) -> Vec<u64> {
    fn rec(sites: &[usize], k: usize, acc: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        if sites.len() < k {
            return;
        }
        rec(&sites[1..], k - 1, acc | (1 << sites[0]), out);
        rec(&sites[1..], k, acc, out);
    }
    let mut out = Vec::new();
    rec(sites, k, 0, &mut out);
    out
}

/// Undirected graph on a sector with an edge per allowed hole hop.
#[derive(Debug, Clone)]
pub struct ConfigGraph {
    /// `adjacency[i]` lists `(j, from, to)`: config `j` reached by moving the hole `from -> to`.
    adjacency: Vec<Vec<(usize, usize, usize)>>,
}

impl ConfigGraph {
    pub fn new(model: &LatticeModel, basis: &SectorBasis) -> Self {
        let n = model.sites();
        let adjacency = basis
            .configs()
            .iter()
            .map(|&c| {
                let x = c.hole();
                (0..n)
                    .filter(|&y| y != x && model.t(x, y) != 0.0)
                    .map(|y| {
                        let next = apply_move(c, x, y).expect("hole is at x");
                        (basis.index_of(&next).expect("moves preserve the sector"), x, y)
                    })
                    .collect()
            })
            .collect();
        ConfigGraph { adjacency }
    }

    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[i].iter().map(|e| e.0)
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// BFS tree from `root`: `parent[j] = Some((i, hole_before))`.
    fn bfs(&self, root: usize) -> Vec<Option<(usize, usize)>> {
        let mut parent = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(i) = queue.pop_front() {
            for &(j, from, _) in &self.adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    parent[j] = Some((i, from));
                    queue.push_back(j);
                }
            }
        }
        parent
    }

    /// Orbits sorted internally and by smallest member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.len()];
        let mut orbits = Vec::new();
        for root in 0..self.len() {
            if label[root] != usize::MAX {
                continue;
            }
            let id = orbits.len();
            let mut members = vec![root];
            label[root] = id;
            let mut queue = VecDeque::from([root]);
            while let Some(i) = queue.pop_front() {
                for j in self.neighbours(i).collect::<Vec<_>>() {
                    if label[j] == usize::MAX {
                        label[j] = id;
                        members.push(j);
                        queue.push_back(j);
                    }
                }
            }
            members.sort_unstable();
            orbits.push(members);
        }
        orbits
    }
}

/// A sector basis together with its lazily built configuration graph.
#[derive(Debug)]
pub struct Sector {
    basis: SectorBasis,
    graph: OnceLock<ConfigGraph>,
    model: LatticeModel,
}

impl Sector {
    pub fn new(model: &LatticeModel, m: Magnetization) -> Result<Self> {
        Ok(Sector { basis: enumerate_sector(model, m)?, graph: OnceLock::new(), model: model.clone() })
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn graph(&self) -> &ConfigGraph {
        self.graph.get_or_init(|| ConfigGraph::new(&self.model, &self.basis))
    }
}

pub fn enumerate_sector(model: &LatticeModel, m: Magnetization) -> Result<SectorBasis> {
    SectorBasis::new(model.sites(), m)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectivityReport {
    pub m: Magnetization,
    pub dimension: usize,
    pub connected: bool,
    pub orbit_sizes: Vec<usize>,
    #[serde(skip)]
    pub orbits: Vec<Vec<usize>>,
}

pub fn connectivity_check(model: &LatticeModel, m: Magnetization) -> Result<ConnectivityReport> {
    let sector = Sector::new(model, m)?;
    Ok(sector_connectivity(&sector))
}

pub fn sector_connectivity(sector: &Sector) -> ConnectivityReport {
    let orbits = sector.graph().orbits();
    ConnectivityReport {
        m: sector.basis().magnetization(),
        dimension: sector.basis().dim(),
        connected: orbits.len() == 1,
        orbit_sizes: orbits.iter().map(Vec::len).collect(),
        orbits,
    }
}

/// Connectivity in every sector, ascending in M.
pub fn connectivity_all(model: &LatticeModel) -> Result<Vec<ConnectivityReport>> {
    Magnetization::all(model.sites()).into_iter().map(|m| connectivity_check(model, m)).collect()
}

/// Sequence of hole positions `x_1, ..., x_l` realising a chain of moves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Connector {
    pub path: Vec<usize>,
}

impl Connector {
    /// Number of hops, `l - 1`.
    pub fn len(&self) -> usize {
        self.path.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Apply the moves in order, checking each hop has nonzero hopping.
    pub fn apply(&self, model: &LatticeModel, start: HoleSpinConfig) -> Option<HoleSpinConfig> {
        if self.path.first() != Some(&start.hole()) {
            return None;
        }
        let mut c = start;
        for w in self.path.windows(2) {
            if model.t(w[1], w[0]) == 0.0 {
                return None;
            }
            c = apply_move(c, w[0], w[1])?;
        }
        Some(c)
    }
}

/// Shortest connector from `a` to `b`, or `None` when they lie in different orbits.
pub fn find_connector(
    model: &LatticeModel,
    m: Magnetization,
    a: HoleSpinConfig,
    b: HoleSpinConfig,
) -> Result<Option<Connector>> {
    let sector = Sector::new(model, m)?;
    sector_connector(&sector, a, b)
}

pub fn sector_connector(sector: &Sector, a: HoleSpinConfig, b: HoleSpinConfig) -> Result<Option<Connector>> {
    let basis = sector.basis();
    let lookup = |c: &HoleSpinConfig| {
        basis.index_of(c).ok_or_else(|| {
            Error::InvalidInput(format!("configuration {c:?} is not in sector {}", basis.magnetization()))
        })
    };
    let (ia, ib) = (lookup(&a)?, lookup(&b)?);
    if ia == ib {
        return Ok(Some(Connector { path: vec![a.hole()] }));
    }
    let parent = sector.graph().bfs(ia);
    if parent[ib].is_none() {
        return Ok(None);
    }
    let mut path = vec![b.hole()];
    let mut cur = ib;
    while let Some((prev, hole_before)) = parent[cur] {
        path.push(hole_before);
        cur = prev;
    }
    path.reverse();
    Ok(Some(Connector { path }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn sector_sizes() {
        let pair = SectorBasis::new(2, Magnetization::from_twice(1)).unwrap();
        assert_eq!(pair.dim(), 2);
        assert_eq!(SectorBasis::new(4, Magnetization::from_twice(1)).unwrap().dim(), 12);
        assert_eq!(SectorBasis::new(4, Magnetization::from_twice(3)).unwrap().dim(), 4);
        for sites in 2..=7 {
            let mut total = 0;
            for m in Magnetization::all(sites) {
                let b = SectorBasis::new(sites, m).unwrap();
                assert_eq!(b.dim(), sites * binom(sites - 1, m.up_count(sites)));
                total += b.dim();
            }
            assert_eq!(total, sites << (sites - 1));
        }
    }

    #[test]
    fn out_of_range_magnetization() {
        assert!(SectorBasis::new(4, Magnetization::from_twice(5)).is_err());
        assert!(SectorBasis::new(4, Magnetization::from_twice(0)).is_err());
        assert!(SectorBasis::new(3, Magnetization::from_twice(1)).is_err());
    }

    #[test]
    fn canonical_order_and_invariants() {
        let b = SectorBasis::new(5, Magnetization::from_twice(0)).unwrap();
        for w in b.configs().windows(2) {
            assert!(w[0] < w[1]);
        }
        for c in b.configs() {
            assert!(!c.is_up(c.hole()));
            assert_eq!(c.n_up() as i32 - (4 - c.n_up() as i32), 0);
            assert_eq!(b.index_of(c).map(|i| b.config(i)), Some(*c));
        }
    }

    #[test]
    fn moves() {
        // hole at 0, up spin on site 1
        let c = HoleSpinConfig::new(0, 0b10).unwrap();
        let d = apply_move(c, 0, 1).unwrap();
        assert_eq!(d.hole(), 1);
        assert!(d.is_up(0));
        assert_eq!(apply_move(d, 1, 0), Some(c));
        let e = HoleSpinConfig::new(2, 0b01).unwrap();
        assert_eq!(apply_move(e, 0, 1), None);
    }

    #[test]
    fn moves_are_invertible_on_every_sector() {
        for entry in corpus::corpus() {
            for m in Magnetization::all(entry.model.sites()) {
                let sector = Sector::new(&entry.model, m).unwrap();
                let g = sector.graph();
                for i in 0..g.len() {
                    for j in g.neighbours(i) {
                        assert!(g.neighbours(j).any(|k| k == i));
                    }
                }
            }
        }
    }

    #[test]
    fn open_chain_splits_into_two_orbits() {
        let model = corpus::open_chain3();
        let r = connectivity_check(&model, Magnetization::from_twice(0)).unwrap();
        assert!(!r.connected);
        assert_eq!(r.orbit_sizes, vec![3, 3]);
        let full = connectivity_check(&model, Magnetization::from_twice(2)).unwrap();
        assert!(full.connected);
    }

    #[test]
    fn complete_graph_is_connected() {
        let r = connectivity_check(&corpus::complete4(), Magnetization::from_twice(1)).unwrap();
        assert!(r.connected);
        assert_eq!(r.orbit_sizes, vec![12]);
    }

    #[test]
    fn spin_flip_symmetry() {
        for entry in corpus::corpus() {
            for m in Magnetization::all(entry.model.sites()) {
                let a = connectivity_check(&entry.model, m).unwrap();
                let b = connectivity_check(&entry.model, m.flipped()).unwrap();
                assert_eq!(a.connected, b.connected);
                let (mut sa, mut sb) = (a.orbit_sizes.clone(), b.orbit_sizes.clone());
                sa.sort();
                sb.sort();
                assert_eq!(sa, sb);
            }
        }
    }

    #[test]
    fn connectors() {
        let pair = corpus::pair();
        let m = Magnetization::from_twice(1);
        let a = HoleSpinConfig::new(0, 0b10).unwrap();
        let b = HoleSpinConfig::new(1, 0b01).unwrap();
        let p = find_connector(&pair, m, a, b).unwrap().unwrap();
        assert_eq!(p.path, vec![0, 1]);
        assert_eq!(p.len(), 1);
        let same = find_connector(&pair, m, a, a).unwrap().unwrap();
        assert!(same.is_empty());

        let chain = corpus::open_chain3();
        let m = Magnetization::from_twice(0);
        let r = connectivity_check(&chain, m).unwrap();
        let basis = enumerate_sector(&chain, m).unwrap();
        let (x, y) = (basis.config(r.orbits[0][0]), basis.config(r.orbits[1][0]));
        assert_eq!(find_connector(&chain, m, x, y).unwrap(), None);
    }

    #[test]
    fn connectors_land_on_target() {
        let model = corpus::square_diagonal();
        let m = Magnetization::from_twice(1);
        let sector = Sector::new(&model, m).unwrap();
        let basis = sector.basis();
        for a in basis.configs() {
            for b in basis.configs() {
                let p = sector_connector(&sector, *a, *b).unwrap().unwrap();
                assert_eq!(p.apply(&model, *a), Some(*b));
            }
        }
    }

    #[test]
    fn magnetization_parsing() {
        assert_eq!("3/2".parse::<Magnetization>().unwrap().twice(), 3);
        assert_eq!("-1/2".parse::<Magnetization>().unwrap().twice(), -1);
        assert_eq!("0.5".parse::<Magnetization>().unwrap().twice(), 1);
        assert_eq!("1".parse::<Magnetization>().unwrap().twice(), 2);
        assert!("1/3".parse::<Magnetization>().is_err());
        assert!("0.3".parse::<Magnetization>().is_err());
        assert_eq!(Magnetization::from_twice(-3).to_string(), "-3/2");
    }
}
