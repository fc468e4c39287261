use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hyperrad", version, about = "Radiation of a uniformly accelerated charge over finite emission windows")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// JSON file with keys q, m, E, u0_perp_x, u0_perp_y, u0_par, c, hbar.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub q: Option<f64>,
    #[arg(long, global = true)]
    pub mass: Option<f64>,
    /// Electric field strength E.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub field: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub u_perp_x: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub u_perp_y: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub u_par: Option<f64>,
    /// Speed of light in the chosen units.
    #[arg(long = "c", global = true)]
    pub c: Option<f64>,
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_evals: Option<usize>,
    /// Fixed |k_perp| cutoff; disables cutoff growth.
    #[arg(long, global = true)]
    pub kperp_max: Option<f64>,
    /// Fixed |k_par| cutoff; disables cutoff growth.
    #[arg(long, global = true)]
    pub kpar_max: Option<f64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file, or directory for `figure`. Defaults to stdout / the current directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the spectral-angular grids of figure 1, 2 or 3 as CSV.
    Figure(FigureArgs),
    /// Total radiated energy over a finite window.
    Energy(WindowArgs),
    /// Radiation rate.
    Rate(RateArgs),
    /// Mean photon number, energies and the photon-number distribution.
    PhotonStats(PhotonArgs),
    /// Special-function tables.
    Specfun {
        #[command(subcommand)]
        command: SpecfunCommand,
    },
    /// Run the acceptance criteria.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
    pub figure: u8,
    /// Comma-separated rapidities; defaults to the figure's own list.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub etas: Option<Vec<f64>>,
    #[arg(long)]
    pub nodes: Option<usize>,
    /// k_x extent in units of eps/c.
    #[arg(long)]
    pub kx_extent: Option<f64>,
    /// k_par half-extent in units of eps/c.
    #[arg(long)]
    pub kpar_extent: Option<f64>,
    /// Source scale c/eps; the charge comes from --q.
    #[arg(long)]
    pub c_over_eps: Option<f64>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct WindowArgs {
    /// Lower rapidity of the window.
    #[arg(long, allow_hyphen_values = true)]
    pub eta_in: Option<f64>,
    /// Upper rapidity of the window.
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// Lower time of the window.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "eta_in")]
    pub t_in: Option<f64>,
    /// Upper time of the window.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "eta")]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Asymmetric,
    HalfInfinite,
    Parallel,
    Symmetric,
    Asymptotic,
    ClassicalNr,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[arg(long, value_enum, default_value = "asymmetric")]
    pub variant: Variant,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Period T of the symmetric window; omitted means T = infinity.
    #[arg(long)]
    pub period: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PhotonArgs {
    #[command(flatten)]
    pub window: WindowArgs,
    /// Largest N in the photon-number table.
    #[arg(long)]
    pub n_max: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum SpecfunCommand {
    /// Incomplete Macdonald function on the product of the given lists, as CSV.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Contour,
    Series,
    Direct,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub nu: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub z: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub u_in: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub u: f64,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Criterion id or module name.
    #[arg(long)]
    pub only: Option<String>,
    /// Divide every tolerance by this factor.
    #[arg(long, default_value_t = 1.0)]
    pub tighten: f64,
}
