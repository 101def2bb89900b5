use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use nagaoka_core::hamiltonian::{assemble_hubbard_full, assemble_sector, Form};
use nagaoka_core::manybody::{BosonBasis, FullFockBasis};
use nagaoka_core::model_file::load_model;
use nagaoka_core::positivity::{certify_sector, qgrid_holstein_certify, GridSpec};
use nagaoka_core::reproduce::{run_criterion, CRITERIA};
use nagaoka_core::sector::{connectivity_check, SectorBasis};
use nagaoka_core::spectral::{multiplet, sector_report, u_sweep, Multiplet, SpectralReport};
use nagaoka_core::{LatticeModel, Magnetization, OnsiteU, SparseMatrix, C64};

use crate::args::{
    AssembleArgs, CertifyArgs, Cli, Command, FormArg, LargeUArgs, ModelArg, ReproduceArgs, SectorArgs, SectorChoice,
    SpectralArgs,
};
use crate::report::{digest_file, num, opt_num, Output, RunReport};
use crate::AcceptanceFailed;

pub fn run(cli: Cli, argv: &[String]) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!(nagaoka_core::Error::InvalidInput("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    let out = Output::new(cli.out);
    let start = Instant::now();
    let name = command_name(&cli.command);
    let result = match cli.command {
        Command::Basis(a) => basis(a, argv, &out),
        Command::Connectivity(a) => connectivity(a, argv, &out),
        Command::Assemble(a) => assemble(a, argv, &out),
        Command::Ed(a) => ed(a, argv, &out),
        Command::Spin(a) => spin(a, &out),
        Command::Largeu(a) => largeu(a, &out),
        Command::Certify(a) => certify(a, argv, &out),
        Command::Reproduce(a) => reproduce(a, argv, &out),
    };
    eprintln!("{name}: {:.3}s", start.elapsed().as_secs_f64());
    result
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Basis(_) => "basis",
        Command::Connectivity(_) => "connectivity",
        Command::Assemble(_) => "assemble",
        Command::Ed(_) => "ed",
        Command::Spin(_) => "spin",
        Command::Largeu(_) => "largeu",
        Command::Certify(_) => "certify",
        Command::Reproduce(_) => "reproduce",
    }
}

struct Loaded {
    model: LatticeModel,
    digest: String,
}

fn load(arg: &ModelArg) -> Result<Loaded> {
    let model = load_model(&arg.model)?;
    let digest = digest_file(&arg.model)?;
    Ok(Loaded { model, digest })
}

fn sectors(model: &LatticeModel, choice: &SectorChoice) -> Result<Vec<Magnetization>> {
    match choice.m {
        Some(m) => {
            SectorBasis::new(model.sites(), m)?;
            Ok(vec![m])
        }
        None => Ok(Magnetization::all(model.sites())),
    }
}

fn sector_form(model: &LatticeModel, form: Option<FormArg>) -> Result<Form> {
    Ok(match form {
        None => Form::default_for(model),
        Some(FormArg::Hubbard) => bail!(nagaoka_core::Error::InvalidInput(
            "the hubbard form lives on the full space; use `assemble --form hubbard`".into()
        )),
        Some(FormArg::Nagaoka) => Form::Nagaoka,
        Some(FormArg::Projected) => Form::Projected,
        Some(FormArg::Holstein) => Form::Holstein,
        Some(FormArg::Langfirsov) => Form::LangFirsov,
        Some(FormArg::Radiation) => Form::Radiation,
    })
}

#[derive(Serialize)]
struct BasisListing {
    m: Magnetization,
    dimension: usize,
    /// One string per configuration: `0` marks the hole, `u`/`d` the spins.
    configurations: Vec<String>,
}

fn basis(a: SectorArgs, argv: &[String], out: &Output) -> Result<()> {
    let l = load(&a.model)?;
    let n = l.model.sites();
    let listings = sectors(&l.model, &a.sectors)?
        .into_iter()
        .map(|m| {
            let b = SectorBasis::new(n, m)?;
            Ok(BasisListing {
                m,
                dimension: b.dim(),
                configurations: b.configs().iter().map(|c| c.render(n)).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.json(&RunReport::new(argv, Some(l.digest), listings))
}

#[derive(Serialize)]
struct ConnectivityListing {
    m: Magnetization,
    dimension: usize,
    connected: bool,
    orbit_sizes: Vec<usize>,
    orbits: Vec<Vec<String>>,
}

fn connectivity(a: SectorArgs, argv: &[String], out: &Output) -> Result<()> {
    let l = load(&a.model)?;
    let n = l.model.sites();
    let rows = sectors(&l.model, &a.sectors)?
        .into_par_iter()
        .map(|m| {
            let r = connectivity_check(&l.model, m)?;
            let b = SectorBasis::new(n, m)?;
            Ok(ConnectivityListing {
                m,
                dimension: r.dimension,
                connected: r.connected,
                orbit_sizes: r.orbit_sizes,
                orbits: r.orbits.iter().map(|o| o.iter().map(|&i| b.config(i).render(n)).collect()).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.json(&RunReport::new(argv, Some(l.digest), rows))
}

#[derive(Serialize)]
struct MatrixHeader<'a> {
    command: &'a [String],
    model_digest: &'a str,
    form: &'a str,
    m: Option<Magnetization>,
    dimension: usize,
    boson_cutoff: Option<usize>,
    provenance: String,
    /// Add to every eigenvalue for the spectrum of the physical operator.
    dropped_constant: f64,
}

fn with_cutoff(model: &LatticeModel, cutoff: Option<usize>) -> Result<LatticeModel> {
    match (cutoff, model.phonon()) {
        (Some(c), Some(ph)) => {
            let mut ph = ph.clone();
            ph.cutoff = c;
            Ok(model.clone().with_phonon(ph)?)
        }
        _ => Ok(model.clone()),
    }
}

/// Full-space Hubbard matrix, restricted to one `S^z` sector when `m` is given.
fn hubbard_matrix(model: &LatticeModel, m: Option<Magnetization>, u: Option<f64>) -> Result<SparseMatrix> {
    let u = match (u, model.onsite_u()) {
        (Some(u), _) => u,
        (None, OnsiteU::Finite(u)) => u,
        (None, OnsiteU::Infinite) => {
            bail!(nagaoka_core::Error::InvalidInput("the hubbard form needs a finite U; pass --u".into()))
        }
    };
    let h = assemble_hubbard_full(model, u)?;
    let Some(m) = m else { return Ok(h) };
    let fock = FullFockBasis::single_hole(model.sites())?;
    SectorBasis::new(model.sites(), m)?;
    let b = model.phonon().map_or(Ok(1), |ph| BosonBasis::new(model.sites(), ph.cutoff).map(|b| b.dim()))?;
    let keep: Vec<usize> = (0..h.dim()).filter(|&i| fock.twice_sz(i / b) == m.twice()).collect();
    Ok(h.submatrix(&keep, &keep))
}

fn assemble(a: AssembleArgs, argv: &[String], out: &Output) -> Result<()> {
    let l = load(&a.model)?;
    let (matrix, provenance, dropped, cutoff, form_name) = if a.form == Some(FormArg::Hubbard) {
        let model = with_cutoff(&l.model, a.cutoff)?;
        let h = hubbard_matrix(&model, a.m, a.u)?;
        (h, "full_space".to_string(), 0.0, model.phonon().map(|p| p.cutoff), "hubbard".to_string())
    } else {
        let m = a.m.ok_or_else(|| anyhow!(nagaoka_core::Error::InvalidInput("--m is required".into())))?;
        let form = sector_form(&l.model, a.form)?;
        let h = assemble_sector(&l.model, form, m, a.cutoff)?;
        let cutoff = h.bosons.as_ref().map(|b| b.cutoff());
        let form_name = serde_json::to_value(form)?.as_str().unwrap_or_default().to_string();
        (h.matrix, h.provenance.to_string(), h.dropped_constant, cutoff, form_name)
    };
    let header = MatrixHeader {
        command: argv,
        model_digest: &l.digest,
        form: &form_name,
        m: a.m,
        dimension: matrix.dim(),
        boson_cutoff: cutoff,
        provenance,
        dropped_constant: dropped,
    };
    out.text(&matrix_market(&matrix, &serde_json::to_string(&header)?))
}

/// Coordinate format with one-based indices; the header comment carries JSON.
fn matrix_market(h: &SparseMatrix, header: &str) -> String {
    let mut s = String::new();
    s.push_str("%%MatrixMarket matrix coordinate complex general\n");
    let _ = writeln!(s, "% {header}");
    let _ = writeln!(s, "{} {} {}", h.rows(), h.cols(), h.nnz());
    for (r, c, v) in h.triplets() {
        let _ = writeln!(s, "{} {} {} {}", r + 1, c + 1, num(v.re), num(v.im));
    }
    s
}

fn reports(l: &Loaded, a: &SpectralArgs) -> Result<Vec<SpectralReport>> {
    let form = sector_form(&l.model, a.form)?;
    sectors(&l.model, &a.sectors)?
        .into_par_iter()
        .map(|m| Ok(sector_report(&assemble_sector(&l.model, form, m, a.cutoff)?)?))
        .collect()
}

#[derive(Serialize)]
struct EdResults {
    sectors: Vec<SpectralReport>,
    /// Present when every sector was computed.
    multiplet: Option<Multiplet>,
}

fn ed(a: SpectralArgs, argv: &[String], out: &Output) -> Result<()> {
    let l = load(&a.model)?;
    let sectors = reports(&l, &a)?;
    let multiplet = (a.sectors.m.is_none()).then(|| multiplet(&sectors));
    out.json(&RunReport::new(argv, Some(l.digest.clone()), EdResults { sectors, multiplet }))
}

fn spin(a: SpectralArgs, out: &Output) -> Result<()> {
    let l = load(&a.model)?;
    let mut s = String::from("m,dimension,ground_energy,degeneracy,gap,stot2,s,cluster_spins\n");
    for r in reports(&l, &a)? {
        let spins: Vec<String> = r.cluster_spins.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.m,
            r.dimension,
            num(r.ground_energy + r.dropped_constant),
            r.degeneracy,
            opt_num(r.gap),
            num(r.stot2_expectation),
            r.resolved_s.map(|x| x.to_string()).unwrap_or_default(),
            spins.join(" ")
        );
    }
    out.text(&s)
}

fn parse_z(text: &str) -> Result<Option<C64>> {
    if text == "auto" {
        return Ok(None);
    }
    let bad = || nagaoka_core::Error::InvalidInput(format!("--z expects `auto` or `RE,IM`, got '{text}'"));
    let (re, im) = text.split_once(',').ok_or_else(bad)?;
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    Ok(Some(C64::new(re, im)))
}

fn largeu(a: LargeUArgs, out: &Output) -> Result<()> {
    let l = load(&a.model)?;
    let (z, points) = u_sweep(&l.model, &a.u_list, parse_z(&a.z)?)?;
    eprintln!("z = {} + {}i", num(z.re), num(z.im));
    let mut s = String::from("u,delta,delta_times_u\n");
    for p in points {
        let _ = writeln!(s, "{},{},{}", num(p.u), num(p.delta), num(p.delta_times_u));
    }
    out.text(&s)
}

fn certify(a: CertifyArgs, argv: &[String], out: &Output) -> Result<()> {
    let l = load(&a.model)?;
    let ms = sectors(&l.model, &a.sectors)?;
    if let (Some(points), Some(spacing)) = (a.qgrid, a.spacing) {
        let spec = GridSpec { points, spacing };
        let certs =
            ms.into_par_iter().map(|m| Ok(qgrid_holstein_certify(&l.model, m, spec)?)).collect::<Result<Vec<_>>>()?;
        return out.json(&RunReport::new(argv, Some(l.digest), certs));
    }
    let certs = ms
        .into_par_iter()
        .map(|m| Ok(certify_sector(&assemble_sector(&l.model, Form::Nagaoka, m, None)?)?))
        .collect::<Result<Vec<_>>>()?;
    out.json(&RunReport::new(argv, Some(l.digest), certs))
}

fn reproduce(a: ReproduceArgs, argv: &[String], out: &Output) -> Result<()> {
    let ids: Vec<u8> = if a.only.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { a.only };
    let mut outcomes = Vec::new();
    for id in ids {
        let outcome = run_criterion(id)
            .with_context(|| format!("unknown criterion {id}"))
            .map_err(|e| anyhow!(nagaoka_core::Error::InvalidInput(format!("{e:#}"))))?;
        eprintln!("{}", outcome.summary());
        outcomes.push(outcome);
    }
    out.json(&RunReport::new(argv, None, &outcomes))?;
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    if failed > 0 {
        return Err(AcceptanceFailed(failed).into());
    }
    Ok(())
}
