//! Command-line front end for `gibbs-fisher`: sweeps, simulations, ensemble
//! reports and Ising scaling studies, emitted as CSV or JSON tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gibbs_fisher::criticality::{critical_temperature, fss_fit, scaling_series, Backend, FitMode};
use gibbs_fisher::ensembles::{conjugate_pair_report, gce_report, gge_report, EnsembleInput};
use gibbs_fisher::estimation::{run_trials, SimConfig};
use gibbs_fisher::fisher::renyi_fisher;
use gibbs_fisher::spectra::truncate_oscillator;
use gibbs_fisher::thermo::renyi_point;
use gibbs_fisher::{fisher_report, parse_model, thermo_point, ThermalModel};

pub mod grid;
pub mod table;

pub use grid::{parse_list, Grid, Spacing};
pub use table::{Cell, Table};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 42;

/// Tail weight discarded when an oscillator is truncated for sampling.
pub const SAMPLING_TRUNCATION: f64 = 1e-15;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Domain(gibbs_fisher::Error),
    #[error("{0}")]
    Io(String),
}

impl From<gibbs_fisher::Error> for CliError {
    fn from(e: gibbs_fisher::Error) -> Self {
        match e {
            gibbs_fisher::Error::Parse(m) => CliError::Parse(m),
            other => CliError::Domain(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Domain(_) => "domain",
            CliError::Io(_) => "io",
        }
    }

    /// One-line JSON object for standard error.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gibbs-fisher",
    version,
    about = "Fisher information of Gibbs states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Write the table here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ln Z, U, Var(H), C_v and S over a temperature grid.
    Thermo {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Entropy and temperature Fisher information with Cramér–Rao bounds.
    Fisher {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1)]
        n: u64,
    },
    /// Rényi entropies and their Fisher information.
    Renyi {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1)]
        n: u64,
        /// Comma-separated orders, e.g. `0.5,2,3`.
        #[arg(long, default_value = "2")]
        alpha: String,
    },
    /// Monte Carlo estimation of S and T from energy measurements.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Copies per trial; a comma-separated list runs each in turn.
        #[arg(long, default_value = "1000")]
        n: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Reports for a generalised Gibbs, grand canonical or conjugate-pair ensemble file.
    Ensemble {
        #[arg(long)]
        input: PathBuf,
        /// Copies used for the conjugate-pair bound.
        #[arg(long, default_value_t = 1)]
        n: u64,
    },
    /// 2D Ising heat capacity and entropy Fisher information against lattice size.
    Scaling {
        /// Comma-separated linear sizes.
        #[arg(long = "L", default_value = "4,6,8")]
        sizes: String,
        /// Temperature grid; defaults to the critical temperature.
        #[arg(long = "T", allow_negative_numbers = true)]
        temperature: Option<Grid>,
        #[arg(long, value_enum, default_value_t = BackendArg::Transfer)]
        backend: BackendArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Enumerate,
    Transfer,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Enumerate => Backend::Enumerate,
            BackendArg::Transfer => Backend::TransferMatrix,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    TwoLevel,
    Oscillator,
    OscillatorBank,
    Classical,
    Diatomic,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, conflicts_with = "model_file")]
    pub model: Option<ModelName>,
    /// JSON model description.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub gap: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Comma-separated mode frequencies.
    #[arg(long)]
    pub omegas: Option<String>,
    #[arg(long)]
    pub dof: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_rot: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_vib: Option<f64>,
}

fn required<T: Copy>(v: Option<T>, flag: &str, model: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Parse(format!("--model {model} needs --{flag}")))
}

impl ModelArgs {
    pub fn build(&self) -> Result<ThermalModel, CliError> {
        if let Some(path) = &self.model_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            return Ok(parse_model(&text)?);
        }
        let name = self
            .model
            .ok_or_else(|| CliError::Parse("one of --model or --model-file is required".into()))?;
        let model = match name {
            ModelName::TwoLevel => ThermalModel::two_level(required(self.gap, "gap", "two-level")?),
            ModelName::Oscillator => {
                ThermalModel::oscillator(required(self.omega, "omega", "oscillator")?)
            }
            ModelName::OscillatorBank => {
                let text = self.omegas.as_deref().ok_or_else(|| {
                    CliError::Parse("--model oscillator-bank needs --omegas".into())
                })?;
                ThermalModel::oscillator_bank(parse_list(text, "frequency")?)
            }
            ModelName::Classical => {
                ThermalModel::classical(required(self.dof, "dof", "classical")?)
            }
            ModelName::Diatomic => ThermalModel::diatomic(
                required(self.t_rot, "t-rot", "diatomic")?,
                required(self.t_vib, "t-vib", "diatomic")?,
            ),
        };
        Ok(model?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Temperature grid `min:max:count:lin|log`, or a single value.
    #[arg(long = "T", conflicts_with = "beta", allow_negative_numbers = true)]
    pub temperature: Option<Grid>,
    /// Inverse-temperature grid, same syntax as `--T`.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<Grid>,
}

impl GridArgs {
    /// `(T, β)` pairs in grid order.
    pub fn points(&self) -> Result<Vec<(f64, f64)>, CliError> {
        let (grid, is_temperature) = match (self.temperature, self.beta) {
            (Some(g), None) => (g, true),
            (None, Some(g)) => (g, false),
            _ => {
                return Err(CliError::Parse(
                    "exactly one of --T or --beta is required".into(),
                ))
            }
        };
        grid.points()
            .into_iter()
            .map(|x| {
                if !(x > 0.0) {
                    return Err(CliError::Domain(gibbs_fisher::Error::InvalidArgument(
                        format!("grid value {x} must be positive"),
                    )));
                }
                Ok(if is_temperature {
                    (x, 1.0 / x)
                } else {
                    (1.0 / x, x)
                })
            })
            .collect()
    }
}

pub fn run(cli: &Cli) -> Result<Table, CliError> {
    match &cli.command {
        Command::Thermo { model, grid } => thermo_table(&model.build()?, &grid.points()?),
        Command::Fisher { model, grid, n } => fisher_table(&model.build()?, &grid.points()?, *n),
        Command::Renyi {
            model,
            grid,
            n,
            alpha,
        } => renyi_table(
            &model.build()?,
            &grid.points()?,
            *n,
            &parse_list(alpha, "alpha")?,
        ),
        Command::Simulate {
            model,
            grid,
            n,
            trials,
            seed,
        } => simulate_table(
            &model.build()?,
            &grid.points()?,
            &parse_list(n, "copy count")?,
            *trials,
            *seed,
        ),
        Command::Ensemble { input, n } => {
            let text = std::fs::read_to_string(input)
                .map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
            ensemble_table(&EnsembleInput::from_json(&text)?, *n)
        }
        Command::Scaling {
            sizes,
            temperature,
            backend,
        } => {
            let temps = temperature.map_or_else(|| vec![critical_temperature()], |g| g.points());
            scaling_table(
                &parse_list(sizes, "lattice size")?,
                &temps,
                (*backend).into(),
            )
        }
    }
}

/// Runs the command and renders the table in the requested format.
pub fn render(cli: &Cli) -> Result<String, CliError> {
    let table = run(cli)?;
    Ok(match cli.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    })
}

pub fn thermo_table(model: &ThermalModel, points: &[(f64, f64)]) -> Result<Table, CliError> {
    let mut table = Table::new(vec!["T", "beta", "lnZ", "U", "var_H", "Cv", "S"]);
    for &(t, beta) in points {
        let p = thermo_point(model, beta)?;
        table.push(vec![
            t.into(),
            beta.into(),
            p.ln_z.into(),
            p.u.into(),
            p.var_h.into(),
            p.c_v.into(),
            p.s.into(),
        ]);
    }
    Ok(table)
}

const FISHER_COLUMNS: [&str; 9] = [
    "T",
    "beta",
    "Cv",
    "F_S",
    "F_T",
    "product",
    "cr_var_S",
    "cr_var_T",
    "cr_product",
];

fn fisher_cells(model: &ThermalModel, t: f64, beta: f64, n: u64) -> Result<Vec<Cell>, CliError> {
    let r = fisher_report(model, beta, n)?;
    Ok(vec![
        t.into(),
        beta.into(),
        r.c_v().into(),
        r.f_s.into(),
        r.f_t.into(),
        r.product_fs_ft.into(),
        r.cr_var_s.into(),
        r.cr_var_t.into(),
        r.cr_product.into(),
    ])
}

pub fn fisher_table(
    model: &ThermalModel,
    points: &[(f64, f64)],
    n: u64,
) -> Result<Table, CliError> {
    let mut table = Table::new(FISHER_COLUMNS.to_vec());
    for &(t, beta) in points {
        table.push(fisher_cells(model, t, beta, n)?);
    }
    Ok(table)
}

pub fn renyi_table(
    model: &ThermalModel,
    points: &[(f64, f64)],
    n: u64,
    alphas: &[f64],
) -> Result<Table, CliError> {
    let mut columns = FISHER_COLUMNS.to_vec();
    columns.extend([
        "alpha",
        "S_alpha",
        "F_S_alpha",
        "C_v_alpha",
        "product_alpha",
    ]);
    let mut table = Table::new(columns);
    for &(t, beta) in points {
        let base = fisher_cells(model, t, beta, n)?;
        for &alpha in alphas {
            let p = renyi_point(model, beta, alpha)?;
            let f = renyi_fisher(model, beta, alpha)?;
            let mut row = base.clone();
            row.extend([
                alpha.into(),
                p.s_alpha.into(),
                f.f_s_alpha.into(),
                f.c_v_alpha.into(),
                f.product_with_f_t.into(),
            ]);
            table.push(row);
        }
    }
    Ok(table)
}

/// Oscillators have no finite spectrum to sample; keep levels until the
/// discarded Boltzmann tail is below [`SAMPLING_TRUNCATION`].
fn sampling_model(model: &ThermalModel, beta: f64) -> Result<ThermalModel, CliError> {
    match model {
        ThermalModel::Oscillator { omega } => {
            Ok(truncate_oscillator(*omega, beta, SAMPLING_TRUNCATION)?)
        }
        m if m.is_finite() => Ok(m.clone()),
        _ => Err(CliError::Domain(gibbs_fisher::Error::InvalidArgument(
            "simulate supports finite spectra and single oscillators".into(),
        ))),
    }
}

pub fn simulate_table(
    model: &ThermalModel,
    points: &[(f64, f64)],
    copies: &[u64],
    trials: u64,
    seed: u64,
) -> Result<Table, CliError> {
    let mut table = Table::new(vec![
        "T",
        "beta",
        "n",
        "trials",
        "n_failed",
        "S_true",
        "T_true",
        "Cv",
        "mean_S_hat",
        "var_S_hat",
        "mean_T_hat",
        "var_T_hat",
        "ratio_S",
        "ratio_T",
        "product_ratio",
        "ratio_S_se",
        "ratio_T_se",
        "bias_S",
        "bias_T",
        "degenerate",
    ]);
    table
        .notes
        .push("plug-in estimates S(beta_hat) and 1/beta_hat; O(1/n) bias is not corrected".into());
    for &(t, beta) in points {
        let model = sampling_model(model, beta)?;
        for &n in copies {
            let st = run_trials(&SimConfig {
                model: model.clone(),
                beta_true: beta,
                n_copies: n,
                n_trials: trials,
                master_seed: seed,
            })?;
            table.push(vec![
                t.into(),
                beta.into(),
                st.n_copies.into(),
                st.n_trials.into(),
                st.n_failed.into(),
                st.s_true.into(),
                st.t_true.into(),
                st.c_v.into(),
                st.mean_s_hat.into(),
                st.var_s_hat.into(),
                st.mean_t_hat.into(),
                st.var_t_hat.into(),
                st.ratio_s.into(),
                st.ratio_t.into(),
                st.product_ratio.into(),
                st.ratio_s_se.into(),
                st.ratio_t_se.into(),
                st.bias_s.into(),
                st.bias_t.into(),
                st.degenerate.into(),
            ]);
        }
    }
    Ok(table)
}

pub fn ensemble_table(input: &EnsembleInput, n: u64) -> Result<Table, CliError> {
    match input {
        EnsembleInput::Gge(e) => {
            let r = gge_report(e)?;
            let m = e.charge_count();
            let mut columns: Vec<String> = vec!["F_S".into(), "Cv_eff".into()];
            let mut row: Vec<Cell> = vec![r.f_s.into(), r.c_v_eff.into()];
            for k in 0..m {
                columns.push(format!("dS_dlambda_{k}"));
                row.push(r.entropy_gradient[k].into());
            }
            for k in 0..m {
                for l in 0..m {
                    columns.push(format!("F_{k}_{l}"));
                    row.push(r.fisher_matrix[k][l].into());
                }
            }
            let mut table = Table::new(columns);
            table.push(row);
            Ok(table)
        }
        EnsembleInput::Gce(g) => {
            let r = gce_report(&g.states, g.beta, g.mu)?;
            let mut table = Table::new(vec![
                "beta",
                "mu",
                "F_beta_beta",
                "F_mu_mu",
                "F_beta_mu",
                "F_S_gce",
                "Cv_mu",
                "beta2_var_K",
                "Cv",
                "Cv_fixed_N",
            ]);
            table.push(vec![
                g.beta.into(),
                g.mu.into(),
                r.f_beta_beta.into(),
                r.f_mu_mu.into(),
                r.f_beta_mu.into(),
                r.f_s_gce.into(),
                r.c_v_mu.into(),
                r.beta_squared_var_grand_energy().into(),
                r.c_v.into(),
                r.c_v_fixed_n.into(),
            ]);
            Ok(table)
        }
        EnsembleInput::Conjugate(c) => {
            let r = conjugate_pair_report(&c.states, c.beta, c.lambda)?;
            if n == 0 {
                return Err(CliError::Domain(gibbs_fisher::Error::InvalidArgument(
                    "--n must be at least 1".into(),
                )));
            }
            let t = 1.0 / r.beta;
            let mut table = Table::new(vec![
                "beta",
                "lambda",
                "F_lambda",
                "F_A",
                "product",
                "product_T2",
                "n",
                "bound",
            ]);
            table.push(vec![
                r.beta.into(),
                c.lambda.into(),
                r.f_lambda.into(),
                r.f_a.into(),
                r.product.into(),
                (r.product * t * t).into(),
                n.into(),
                r.bound_for_n(n).into(),
            ]);
            Ok(table)
        }
    }
}

pub fn scaling_table(sizes: &[usize], temps: &[f64], backend: Backend) -> Result<Table, CliError> {
    let mut table = Table::new(vec!["L", "T", "t", "Cv_total", "Cv_per_spin", "F_S"]);
    for &t in temps {
        let series = scaling_series(sizes, t, backend)?;
        for e in &series.entries {
            table.push(vec![
                e.size.into(),
                e.temperature.into(),
                e.reduced_temperature.into(),
                e.c_v_total.into(),
                e.c_v_per_spin.into(),
                e.f_s.into(),
            ]);
        }
        if temps.len() == 1 && sizes.len() >= 3 {
            for (name, mode) in [
                ("fit_power_law", FitMode::PowerLaw),
                ("fit_logarithmic", FitMode::Logarithmic),
            ] {
                let fit = fss_fit(&series, mode)?;
                table.extras.push((
                    name,
                    vec![
                        ("slope", fit.slope.into()),
                        ("intercept", fit.intercept.into()),
                        ("r_squared", fit.r_squared.into()),
                    ],
                ));
            }
        }
    }
    Ok(table)
}
