//! Acceptance experiments. Each criterion runs a fixed, seeded computation
//! and reports a list of named checks.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{self, corpus};
use crate::error::Result;
use crate::hamiltonian::{
    assemble_holstein_sector, assemble_lang_firsov_sector, assemble_nagaoka_projected, assemble_nagaoka_sector,
    assemble_radiation_sector, coupled_modes, expm_i_hermitian, peierls_field, riemann_kernel_error, Form,
};
use crate::manybody::BosonBasis;
use crate::model::{LatticeModel, RadiationParams};
use crate::positivity::{
    certify_sector, diagonal_perturbation_equivalence, ergodicity_certificate, qgrid_holstein_certify,
    spin_lowering_positivity, GridSpec, STRICT_POSITIVITY,
};
use crate::sector::{connectivity_all, connectivity_check, Magnetization};
use crate::sparse::C64;
use crate::spectral::{all_sector_reports, energy_split_bound, multiplet, sector_report, u_sweep, SECTOR_MATCH_TOL};

/// Seed for every random draw in the acceptance runs.
pub const SEED: u64 = 0x006e_6167_616f_6b61;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Wall-time budget in seconds, if any.
    pub time_limit: Option<f64>,
    pub within_time_limit: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionOutcome {
    /// One-line summary, `PASS`/`FAIL` first.
    pub fn summary(&self) -> String {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        let mut line = format!(
            "{} criterion {:>2} ({}) [{:.2}s]",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64()
        );
        if !failed.is_empty() {
            line.push_str(&format!(": failed {}", failed.join(", ")));
        }
        if !self.within_time_limit {
            line.push_str(&format!(": over the {:.0}s budget", self.time_limit.unwrap_or(0.0)));
        }
        line
    }
}

pub const CRITERIA: [(u8, &str, Option<f64>); 12] = [
    (1, "ferromagnetic ground multiplet", Some(10.0)),
    (2, "connectivity failure detection", Some(1.0)),
    (3, "direct and projected constructions agree", None),
    (4, "Perron-Frobenius certificates", None),
    (5, "norm-resolvent limit", Some(60.0)),
    (6, "doubly occupied energy bound", None),
    (7, "Holstein stability", Some(300.0)),
    (8, "Lang-Firsov consistency", None),
    (9, "spin-lowering positivity", None),
    (10, "radiation stability", Some(120.0)),
    (11, "diagonal perturbations keep ergodicity", None),
    (12, "grid positivity", None),
];

/// Run one criterion by id (1..=12).
pub fn run_criterion(id: u8) -> Option<CriterionOutcome> {
    let &(_, title, time_limit) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let result = match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        11 => criterion_11(),
        12 => criterion_12(),
        _ => unreachable!(),
    };
    let elapsed = start.elapsed();
    let checks = result.unwrap_or_else(|e| vec![Check::new("run", false, format!("error: {e}"))]);
    let within_time_limit = time_limit.is_none_or(|t| elapsed.as_secs_f64() <= t);
    Some(CriterionOutcome {
        id,
        title,
        pass: !checks.is_empty() && checks.iter().all(|c| c.pass) && within_time_limit,
        checks,
        time_limit,
        within_time_limit,
        elapsed,
    })
}

pub fn run_all() -> Vec<CriterionOutcome> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0)).collect()
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".into(), |v| format!("{v}"))
}

fn criterion_1() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for entry in corpus() {
        if !connectivity_all(&entry.model)?.iter().all(|r| r.connected) {
            continue;
        }
        let n = entry.model.sites();
        let reports = all_sector_reports(&entry.model, Form::Nagaoka, None)?;
        let mp = multiplet(&reports);
        let s_max = (n as f64 - 1.0) / 2.0;
        let gap_ok = mp.gap.is_some_and(|g| g > crate::spectral::cluster_tolerance(mp.ground_energy));
        let pass = mp.spin == Some(s_max)
            && mp.size == n
            && mp.unique_per_sector
            && reports.len() == n
            && mp.spread <= SECTOR_MATCH_TOL
            && gap_ok;
        checks.push(Check::new(
            entry.name,
            pass,
            format!(
                "E0 = {}, S = {}, multiplet {} of {n}, spread {:e}, gap {}",
                mp.ground_energy,
                fmt_opt(mp.spin),
                mp.size,
                mp.spread,
                fmt_opt(mp.gap)
            ),
        ));
    }
    Ok(checks)
}

fn criterion_2() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let chain = connectivity_check(&corpus::open_chain3(), Magnetization::from_twice(0))?;
    let mut sizes = chain.orbit_sizes.clone();
    sizes.sort_unstable();
    checks.push(Check::new(
        "chain3 M=0 splits",
        !chain.connected && sizes == [3, 3],
        format!("connected = {}, orbit sizes {:?}", chain.connected, sizes),
    ));
    let mut disagreements = Vec::new();
    let mut pairs = 0;
    for entry in corpus() {
        for m in Magnetization::all(entry.model.sites()) {
            let bfs = connectivity_check(&entry.model, m)?.connected;
            let cert = ergodicity_certificate(&assemble_nagaoka_sector(&entry.model, m)?);
            pairs += 1;
            if bfs != cert {
                disagreements.push(format!("{} M={m}", entry.name));
            }
        }
    }
    checks.push(Check::new(
        "certificate agrees with BFS",
        disagreements.is_empty(),
        format!("{pairs} sectors, disagreements {disagreements:?}"),
    ));
    Ok(checks)
}

fn criterion_3() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for entry in corpus() {
        let mut worst = 0.0f64;
        for m in Magnetization::all(entry.model.sites()) {
            let direct = assemble_nagaoka_sector(&entry.model, m)?.matrix;
            let projected = assemble_nagaoka_projected(&entry.model, m)?.matrix;
            worst = worst.max(direct.sub(&projected).max_abs());
        }
        checks.push(Check::new(entry.name, worst <= 1e-12, format!("max entry difference {worst:e}")));
    }
    Ok(checks)
}

fn criterion_4() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for entry in corpus() {
        let mut certified = 0;
        let mut problems = Vec::new();
        let mut min_entry = f64::INFINITY;
        for m in Magnetization::all(entry.model.sites()) {
            let h = assemble_nagaoka_sector(&entry.model, m)?;
            let connected = connectivity_check(&entry.model, m)?.connected;
            // Disconnected sectors are still run: the implication must not fire.
            match certify_sector(&h) {
                Ok(c) if connected => {
                    let ok = c.offdiag_sign_ok
                        && c.irreducible
                        && c.ground_unique
                        && c.ground_strictly_positive
                        && c.min_entry > STRICT_POSITIVITY;
                    if ok {
                        certified += 1;
                        min_entry = min_entry.min(c.min_entry);
                    } else {
                        problems.push(format!("M={m} not certified"));
                    }
                }
                Ok(_) => {}
                Err(e) => problems.push(format!("M={m}: {e}")),
            }
        }
        checks.push(Check::new(
            entry.name,
            problems.is_empty(),
            format!("{certified} sectors certified, min entry {min_entry:e}, problems {problems:?}"),
        ));
    }
    Ok(checks)
}

/// Checks of the large-U law on one model.
fn resolvent_checks(name: &str, model: &LatticeModel) -> Result<Vec<Check>> {
    let mut us = vec![1.0];
    us.extend((0..=15).map(|k| 100.0 * 2f64.powi(k)));
    let decades = [1e3, 1e4, 1e5, 1e6];
    for d in decades {
        us.push(d);
        us.push(2.0 * d);
    }
    us.sort_by(f64::total_cmp);
    us.dedup();
    let (_, pts) = u_sweep(model, &us, None)?;
    let delta = |u: f64| pts.iter().find(|p| p.u == u).map(|p| p.delta).unwrap_or(f64::NAN);

    let large: Vec<_> = pts.iter().filter(|p| p.u >= 100.0).collect();
    let decreasing = large.windows(2).all(|w| w[1].delta < w[0].delta);
    let ratios: Vec<f64> = decades.iter().map(|&u| delta(2.0 * u) / delta(u)).collect();
    let ratio_ok = ratios.iter().all(|r| (0.4..=0.6).contains(r));
    let (d1, d6) = (delta(1.0), delta(1e6));
    Ok(vec![
        Check::new(
            format!("{name} decreasing"),
            decreasing,
            format!("Delta(100) = {:e}, Delta(3.2768e6) = {:e}", large[0].delta, large[large.len() - 1].delta),
        ),
        Check::new(format!("{name} ratio"), ratio_ok, format!("Delta(2U)/Delta(U) at 1e3..1e6 = {ratios:?}")),
        Check::new(format!("{name} decay"), d6 <= 1e-4 * d1, format!("Delta(1) = {d1:e}, Delta(1e6) = {d6:e}")),
    ])
}

fn criterion_5() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (name, model) in [
        ("square", corpus::square()),
        ("complete4", corpus::complete4()),
        ("square_diagonal", corpus::square_diagonal()),
        ("pair", corpus::pair()),
    ] {
        checks.extend(resolvent_checks(name, &model)?);
    }
    let holstein = corpus::with_local_phonons(corpus::pair(), 0.5, 1.0, 4);
    checks.extend(resolvent_checks("pair holstein", &holstein)?.into_iter().filter(|c| c.name.ends_with("ratio")));
    Ok(checks)
}

fn criterion_6() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for entry in corpus() {
        let mut ok = true;
        let mut worst = f64::INFINITY;
        let mut c_val = None;
        for u in [0.0, 1.0, 10.0, 100.0, 1000.0] {
            let r = energy_split_bound(&entry.model, u)?;
            ok &= r.bound_ok;
            if let (Some(e), Some(c)) = (r.e_h1, r.c) {
                worst = worst.min(e - u - c);
                c_val = Some(c);
            }
        }
        let detail = match c_val {
            Some(c) => format!("C = {c}, min over U of E(H1) - U - C = {worst:e}"),
            None => "no doubly occupied states".into(),
        };
        checks.push(Check::new(entry.name, ok, detail));
    }
    Ok(checks)
}

fn criterion_7() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for g in [0.25, 0.5, 1.0] {
        let model = corpus::with_local_phonons(corpus::complete4(), g, 1.0, 2);
        let mut energies = Vec::new();
        for cutoff in [2, 3] {
            let reports = all_sector_reports(&model, Form::Holstein, Some(cutoff))?;
            let mp = multiplet(&reports);
            let per_sector: Vec<String> =
                reports.iter().map(|r| format!("M={} S={} deg {}", r.m, fmt_opt(r.resolved_s), r.degeneracy)).collect();
            let ok = reports.iter().all(|r| r.resolved_s == Some(1.5) && r.degeneracy == 1);
            checks.push(Check::new(
                format!("g={g} cutoff {cutoff} spin"),
                ok,
                format!("E0 = {}, spread {:e}, {}", mp.ground_energy, mp.spread, per_sector.join("; ")),
            ));
            energies.push(mp.ground_energy);
        }
        let shift = (energies[1] - energies[0]).abs();
        let tol = if g <= 0.25 { 1e-4 } else { 1e-2 };
        checks.push(Check::new(
            format!("g={g} cutoff shift"),
            shift <= tol,
            format!("|E(3) - E(2)| = {shift:e}, tolerance {tol:e}"),
        ));
    }
    Ok(checks)
}

fn criterion_8() -> Result<Vec<Check>> {
    let model = corpus::with_local_phonons(corpus::pair(), 0.5, 1.0, 2);
    let m = Magnetization::from_twice(1);
    let mut diffs = Vec::new();
    for cutoff in [2, 4, 8] {
        let direct = sector_report(&assemble_holstein_sector(&model, m, cutoff)?)?;
        let lf = sector_report(&assemble_lang_firsov_sector(&model, m, cutoff)?)?;
        let e_direct = direct.ground_energy + direct.dropped_constant;
        let e_lf = lf.ground_energy + lf.dropped_constant;
        diffs.push((cutoff, (e_lf - e_direct).abs()));
    }
    let shrinking = diffs.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(vec![Check::new("pair g=0.5", shrinking, format!("(cutoff, |E_LF + const - E_direct|) = {diffs:?}"))])
}

fn criterion_9() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for entry in corpus() {
        let n = entry.model.sites();
        let mut pairs = 0;
        let mut ok = true;
        for m in Magnetization::all(n) {
            if m.lowered().is_valid_for(n) {
                pairs += 1;
                ok &= spin_lowering_positivity(n, m)?;
            }
        }
        checks.push(Check::new(entry.name, ok, format!("{pairs} adjacent sector pairs")));
    }
    Ok(checks)
}

/// `max || U* U - I ||` over the bonds of a radiation model, `U = exp(i phi)`.
fn peierls_unitarity(model: &LatticeModel, cutoff: usize) -> Result<f64> {
    let rad = model.radiation().expect("radiation model");
    let modes = coupled_modes(model)?;
    let bosons = BosonBasis::new(modes.len(), cutoff)?;
    let id = DMatrix::<C64>::identity(bosons.dim(), bosons.dim());
    let mut worst = 0.0f64;
    for (x, y) in model.bonds() {
        let u = expm_i_hermitian(&peierls_field(rad, &modes, &bosons, x, y)?, 1.0);
        worst = worst.max((u.adjoint() * &u - &id).norm());
    }
    Ok(worst)
}

fn spin_one_unique(model: &LatticeModel, cutoff: usize) -> Result<(bool, String)> {
    let reports = all_sector_reports(model, Form::Radiation, Some(cutoff))?;
    let ok = reports.iter().all(|r| r.resolved_s == Some(1.0) && r.degeneracy == 1);
    let detail = reports
        .iter()
        .map(|r| {
            format!(
                "M={} dim {} E0 {} S={} deg {}",
                r.m,
                r.dimension,
                r.ground_energy,
                fmt_opt(r.resolved_s),
                r.degeneracy
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok((ok, detail))
}

fn criterion_10() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let cutoff = 2;

    let collinear = corpus::radiation_triangle(4.0, 2.0, 1.0, cutoff);
    let modes = coupled_modes(&collinear)?;
    checks.push(Check::new("collinear mode count", modes.len() <= 2, format!("{} coupled modes", modes.len())));
    let (ok, detail) = spin_one_unique(&collinear, cutoff)?;
    checks.push(Check::new("collinear S=1 unique", ok, detail));

    let planar = corpus::radiation_planar_triangle(4.0, 2.0, 1.0, cutoff);
    let (ok, detail) = spin_one_unique(&planar, cutoff)?;
    checks.push(Check::new("planar S=1 unique", ok, detail));

    // Below the first nonzero |k| = 2 pi / L only the k = 0 modes remain and
    // they do not couple.
    let mass = 1.0;
    let decoupled = corpus::triangle().with_radiation(RadiationParams::on_line(3, 4.0, 1.0, mass, cutoff))?;
    let ladder_modes = coupled_modes(&decoupled)?.len();
    let mut worst = 0.0f64;
    for m in Magnetization::all(3) {
        let rad = assemble_radiation_sector(&decoupled, m, cutoff)?.matrix.to_dense();
        let mut got: Vec<f64> = nalgebra::SymmetricEigen::new(rad).eigenvalues.iter().copied().collect();
        got.sort_by(f64::total_cmp);
        let el = assemble_nagaoka_sector(&corpus::triangle(), m)?.matrix.to_dense_real();
        let bosons = BosonBasis::new(ladder_modes, cutoff)?;
        let mut want = Vec::new();
        for e in nalgebra::SymmetricEigen::new(el).eigenvalues.iter() {
            for b in 0..bosons.dim() {
                want.push(e + mass * bosons.total_occupation(b) as f64);
            }
        }
        want.sort_by(f64::total_cmp);
        if got.len() != want.len() {
            worst = f64::INFINITY;
            break;
        }
        for (a, b) in got.iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
    }
    checks.push(Check::new(
        "decoupled limit",
        worst <= 1e-10,
        format!("{ladder_modes} k = 0 modes, max eigenvalue difference {worst:e}"),
    ));

    let unitarity = peierls_unitarity(&collinear, cutoff)?.max(peierls_unitarity(&planar, cutoff)?);
    checks.push(Check::new("Peierls unitarity", unitarity <= 1e-12, format!("max ||U*U - I|| = {unitarity:e}")));

    for (name, model) in [("collinear", &collinear), ("planar", &planar)] {
        let mut ratios = Vec::new();
        for (x, y) in model.bonds() {
            let mut n = 8;
            while n < 128 {
                let a = riemann_kernel_error(model, x, y, n)?;
                let b = riemann_kernel_error(model, x, y, 2 * n)?;
                ratios.push(b / a);
                n *= 2;
            }
        }
        let ok = ratios.iter().all(|r| (0.375..=0.625).contains(r));
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
        checks.push(Check::new(
            format!("{name} Riemann halving"),
            ok,
            format!("{} ratios in [{lo}, {hi}]", ratios.len()),
        ));
    }
    Ok(checks)
}

fn criterion_11() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checks = Vec::new();
    for entry in corpus() {
        let sectors = Magnetization::all(entry.model.sites())
            .into_iter()
            .map(|m| assemble_nagaoka_sector(&entry.model, m))
            .collect::<Result<Vec<_>>>()?;
        let mut changed = 0;
        for _ in 0..100 {
            let h = &sectors[rng.random_range(0..sectors.len())];
            let scale = 10f64.powf(rng.random_range(-3.0..3.0));
            let d: Vec<f64> = (0..h.dim()).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
            if !diagonal_perturbation_equivalence(h, &d)? {
                changed += 1;
            }
        }
        checks.push(Check::new(entry.name, changed == 0, format!("100 trials, {changed} changed")));
    }
    Ok(checks)
}

fn criterion_12() -> Result<Vec<Check>> {
    // a = sqrt(2) g / omega^{3/2} = 0.5 lands on both grids.
    let g = 0.5 / 2f64.sqrt();
    let model = corpus::with_local_phonons(corpus::pair(), g, 1.0, 16);
    let m = Magnetization::from_twice(1);
    let fock = sector_report(&assemble_holstein_sector(&model, m, 16)?)?;
    let e_fock = fock.ground_energy + fock.dropped_constant;

    let coarse = qgrid_holstein_certify(&model, m, GridSpec { points: 64, spacing: 0.125 })?;
    let fine = qgrid_holstein_certify(&model, m, GridSpec { points: 128, spacing: 0.0625 })?;
    let c = &coarse.certificate;
    let (d64, d128) = ((coarse.energy - e_fock).abs(), (fine.energy - e_fock).abs());
    Ok(vec![
        Check::new(
            "64-point ground vector",
            c.ground_strictly_positive && c.ground_unique && c.offdiag_sign_ok && c.irreducible,
            format!("dimension {}, min entry {:e}", c.dimension, c.min_entry),
        ),
        Check::new(
            "refinement converges",
            d128 < d64 && d128 <= 1e-3,
            format!(
                "E_fock(16) = {e_fock}, E_64 = {}, E_128 = {}, errors {d64:e} -> {d128:e}",
                coarse.energy, fine.energy
            ),
        ),
    ])
}
