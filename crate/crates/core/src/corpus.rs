//! Built-in test corpus of small pure-Hubbard models at U = inf, spanning
//! connected and disconnected hole-spin sectors.

use nalgebra::DMatrix;

use crate::model::{generate_lattice, LatticeKind, LatticeModel, PhononParams, RadiationParams};

#[derive(Debug, Clone)]
pub struct CorpusModel {
    pub name: &'static str,
    pub model: LatticeModel,
}

fn named(kind: LatticeKind, extent: &[usize]) -> LatticeModel {
    LatticeModel::new(generate_lattice(kind, extent, 1.0).expect("corpus generator")).expect("corpus model")
}

pub fn pair() -> LatticeModel {
    named(LatticeKind::Chain, &[2])
}

pub fn open_chain3() -> LatticeModel {
    named(LatticeKind::Chain, &[3])
}

pub fn triangle() -> LatticeModel {
    named(LatticeKind::Complete, &[3])
}

pub fn square() -> LatticeModel {
    named(LatticeKind::SquarePatch, &[2, 2])
}

pub fn complete4() -> LatticeModel {
    named(LatticeKind::Complete, &[4])
}

/// 2x2 plaquette with one diagonal bond.
pub fn square_diagonal() -> LatticeModel {
    named(LatticeKind::TriangularPatch, &[2, 2])
}

pub fn corpus() -> Vec<CorpusModel> {
    vec![
        CorpusModel { name: "pair", model: pair() },
        CorpusModel { name: "chain3", model: open_chain3() },
        CorpusModel { name: "triangle", model: triangle() },
        CorpusModel { name: "square", model: square() },
        CorpusModel { name: "complete4", model: complete4() },
        CorpusModel { name: "square_diagonal", model: square_diagonal() },
    ]
}

/// Attach local (diagonal) phonon coupling `g` on every site.
pub fn with_local_phonons(model: LatticeModel, g: f64, omega: f64, cutoff: usize) -> LatticeModel {
    let n = model.sites();
    model
        .with_phonon(PhononParams { coupling: DMatrix::from_diagonal_element(n, n, g), omega, cutoff })
        .expect("valid phonon block")
}

/// Triangle placed on the x axis at -1, 0, 1 inside a box of side `box_length`,
/// with decoupled modes pruned.
pub fn radiation_triangle(box_length: f64, uv_cutoff: f64, mass: f64, cutoff: usize) -> LatticeModel {
    let mut rad = RadiationParams::on_line(3, box_length, uv_cutoff, mass, cutoff);
    rad.prune_decoupled = true;
    triangle().with_radiation(rad).expect("valid radiation block")
}

/// Equilateral triangle in the xy plane, centred at the origin.
pub fn radiation_planar_triangle(box_length: f64, uv_cutoff: f64, mass: f64, cutoff: usize) -> LatticeModel {
    let r = 1.0 / 3f64.sqrt();
    let positions = (0..3)
        .map(|i| {
            let a = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * i as f64 / 3.0;
            [r * a.cos(), r * a.sin(), 0.0]
        })
        .collect();
    triangle()
        .with_radiation(RadiationParams { box_length, uv_cutoff, mass, cutoff, positions, prune_decoupled: true })
        .expect("valid radiation block")
}
