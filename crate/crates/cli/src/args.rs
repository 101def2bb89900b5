use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nagaoka_core::Magnetization;

#[derive(Debug, Parser)]
#[command(name = "nagaoka", version, about = "Single-hole Hubbard models at infinite on-site repulsion")]
pub struct Cli {
    /// Worker threads for sector and U sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the hole-spin configurations of each sector.
    Basis(SectorArgs),
    /// Orbits of the hole-move graph in each sector.
    Connectivity(SectorArgs),
    /// Print one Hamiltonian as matrix-market triplets.
    Assemble(AssembleArgs),
    /// Ground-state reports with total spin.
    Ed(SpectralArgs),
    /// Total spin of the ground cluster per sector, as CSV.
    Spin(SpectralArgs),
    /// Resolvent distance to the U = inf limit over a list of U, as CSV.
    Largeu(LargeUArgs),
    /// Perron-Frobenius certificates in the configuration or grid basis.
    Certify(CertifyArgs),
    /// Run the acceptance criteria on the built-in corpus.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct ModelArg {
    /// Model file (TOML).
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = false, multiple = false)]
pub struct SectorChoice {
    /// Magnetization, e.g. 1/2, -3/2 or 0.
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<Magnetization>,
    /// Every sector (the default).
    #[arg(long)]
    pub all: bool,
}

#[derive(Debug, Args)]
pub struct SectorArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub sectors: SectorChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    Hubbard,
    Nagaoka,
    Projected,
    Holstein,
    Langfirsov,
    Radiation,
}

#[derive(Debug, Args)]
pub struct AssembleArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Magnetization; optional for the full-space Hubbard form.
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<Magnetization>,
    #[arg(long, value_enum)]
    pub form: Option<FormArg>,
    /// Per-mode boson cutoff, overriding the model file.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// On-site U for the full-space form, overriding the model file.
    #[arg(long)]
    pub u: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub sectors: SectorChoice,
    #[arg(long, value_enum)]
    pub form: Option<FormArg>,
    #[arg(long)]
    pub cutoff: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LargeUArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Comma-separated U values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub u_list: Vec<f64>,
    /// `auto` or `RE,IM`.
    #[arg(long, default_value = "auto", allow_hyphen_values = true)]
    pub z: String,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub sectors: SectorChoice,
    /// Grid points per phonon mode; switches to the grid certificate.
    #[arg(long, requires = "spacing")]
    pub qgrid: Option<usize>,
    /// Grid spacing.
    #[arg(long, requires = "qgrid")]
    pub spacing: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Run only these criteria (1..=12).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
}
