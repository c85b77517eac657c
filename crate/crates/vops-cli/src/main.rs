//! Command-line front end: point evaluations and grid scans of the
//! nonclassicality potentials, phase-space distributions, the model fit, and
//! the scissors preparation report, emitted as CSV or JSON.

mod emit;
mod input;

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vops::fit::{fit_model_with_options, FitOptions, ParamId};
use vops::linalg::{c64, C64};
use vops::phasespace::{amps_surface, marginal, qpd_grid_single, GridSpec, MarginalPair};
use vops::potentials::{potential_set, regime_map, CellLabel};
use vops::states::{
    dephase_mix, scissors_output, sigma_prime, two_mode_closed_form, vops, ChannelParams,
};
use vops::{Error, Result};

use emit::{fmt_f, write_output, Cell, Table};
use input::read_density;

#[derive(Parser)]
#[command(
    name = "vops",
    version,
    about = "Nonclassicality potentials of vacuum-one-photon superposition qubits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entanglement, steering, and Bell potentials at points or over grids
    Potentials(PotentialsArgs),
    /// Regime classification over a (p, x) grid
    Map(MapArgs),
    /// Single-mode Wigner function (s = 0)
    Wigner(SingleModeArgs),
    /// Single-mode s-parametrized quasiprobability distribution
    Qpd(QpdArgs),
    /// Quadrature-pair marginals of the two-mode Wigner function
    Marginals(TwoModeArgs),
    /// Maximum-spin-projection probability surface of the two-mode state
    Amps(TwoModeArgs),
    /// Fit the channel model to a density-matrix file
    Fit(FitArgs),
    /// Quantum scissors preparation report
    Scissors(ScissorsArgs),
}

/// Coherence argument: an explicit value, or `pure` for the maximal
/// `sqrt(p(1-p))` at whatever `p` the row uses.
#[derive(Clone, Copy, Debug)]
enum XArg {
    Pure,
    Value(f64),
}

impl FromStr for XArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "pure" {
            return Ok(XArg::Pure);
        }
        s.parse::<f64>()
            .map(XArg::Value)
            .map_err(|_| format!("expected a number or 'pure', got {s:?}"))
    }
}

impl XArg {
    fn resolve(self, p: f64) -> f64 {
        match self {
            XArg::Pure => (p * (1.0 - p)).sqrt(),
            XArg::Value(v) => v,
        }
    }
}

/// Second preparation probability: a value, or `scan` to sweep it over a grid.
#[derive(Clone, Copy, Debug)]
enum PprimeArg {
    Scan,
    Value(f64),
}

impl FromStr for PprimeArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "scan" {
            return Ok(PprimeArg::Scan);
        }
        s.parse::<f64>()
            .map(PprimeArg::Value)
            .map_err(|_| format!("expected a number or 'scan', got {s:?}"))
    }
}

/// One `min:max:step` axis.
#[derive(Clone, Debug)]
struct GridArg {
    min: f64,
    max: f64,
    step: f64,
    raw: String,
}

impl FromStr for GridArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, step] = parts[..] else {
            return Err(format!("expected min:max:step, got {s:?}"));
        };
        let parse = |name: &str, v: &str| {
            v.parse::<f64>().map_err(|_| format!("grid {name} {v:?} is not a number"))
        };
        Ok(GridArg {
            min: parse("min", min)?,
            max: parse("max", max)?,
            step: parse("step", step)?,
            raw: s.to_string(),
        })
    }
}

impl GridArg {
    fn spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.min, self.max, self.step)
    }
}

#[derive(Args)]
struct ChannelArgs {
    /// Phase-damping rate on both output modes
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    /// Beam-splitter mixing angle theta, with r = sin(theta/2)
    #[arg(long)]
    theta: Option<f64>,
    /// Beam-splitter reflectivity r^2 (alternative to --theta; default 0.5)
    #[arg(long, conflicts_with = "theta")]
    rsq: Option<f64>,
}

impl ChannelArgs {
    fn params(&self) -> Result<ChannelParams> {
        match (self.theta, self.rsq) {
            (Some(theta), _) => ChannelParams::new(self.q, theta),
            (None, Some(rsq)) => ChannelParams::from_rsq(self.q, rsq),
            (None, None) => ChannelParams::new(self.q, FRAC_PI_2),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutArgs {
    /// Output file (stdout when omitted); written atomically
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format [default: csv, except fit and scissors: json]
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl OutArgs {
    fn emit(&self, table: &Table, default: Format) -> Result<()> {
        let content = match self.format.unwrap_or(default) {
            Format::Csv => table.render_csv(),
            Format::Json => table.render_json(),
        };
        write_output(&self.out, &content)
    }
}

#[derive(Args)]
struct PotentialsArgs {
    /// Single-photon probability p
    #[arg(long)]
    p: Option<f64>,
    /// Coherence x (a number, or 'pure' for sqrt(p(1-p)))
    #[arg(long, allow_hyphen_values = true)]
    x: Option<XArg>,
    /// Mix sigma(p, pure) with vacuum at weight p' ('scan' sweeps a grid)
    #[arg(long)]
    pprime: Option<PprimeArg>,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Scan axis as min:max:step; repeat for a product grid
    #[arg(long = "grid", allow_hyphen_values = true)]
    grids: Vec<GridArg>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct MapArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Scan axes as min:max:step, exactly twice: p axis then x axis
    #[arg(long = "grid", allow_hyphen_values = true)]
    grids: Vec<GridArg>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SingleModeArgs {
    /// Single-photon probability p
    #[arg(long)]
    p: f64,
    /// Coherence x (a number, or 'pure' for sqrt(p(1-p))) [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    x: Option<XArg>,
    /// Axis as min:max:step; once for both axes or twice for X then Y
    /// [default: -3:3:0.02]
    #[arg(long = "grid", allow_hyphen_values = true)]
    grids: Vec<GridArg>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct QpdArgs {
    /// Quasiprobability order (s < 0.95; -1 Husimi, 0 Wigner)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    s: f64,
    #[command(flatten)]
    single: SingleModeArgs,
}

#[derive(Args)]
struct TwoModeArgs {
    /// Single-photon probability p of the input qubit
    #[arg(long)]
    p: f64,
    /// Coherence x (a number, or 'pure' for sqrt(p(1-p))) [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    x: Option<XArg>,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Axis as min:max:step; once for the first axis or twice for both
    #[arg(long = "grid", allow_hyphen_values = true)]
    grids: Vec<GridArg>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct FitArgs {
    /// Density-matrix JSON file ({basis, matrix of [re, im]})
    input: PathBuf,
    /// Seed for the multistart optimizer
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fix the damping rate q instead of fitting it
    #[arg(long)]
    q: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ScissorsArgs {
    /// Target single-photon probability; sets |alpha|^2 = p/(1-p)
    #[arg(long)]
    p: f64,
    /// Fock-space truncation of the coherent input
    #[arg(long, default_value_t = 12)]
    cutoff: usize,
    /// Herald counts n0 n1 of the two detection patterns
    #[arg(num_args = 0..=2, default_values_t = [1, 0], value_name = "COUNT")]
    counts: Vec<u64>,
    #[command(flatten)]
    out: OutArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Domain(_) => ExitCode::from(2),
                Error::Numerical(_) => ExitCode::from(3),
            }
        }
    }
}

fn run(command: &Command) -> Result<()> {
    match command {
        Command::Potentials(args) => cmd_potentials(args),
        Command::Map(args) => cmd_map(args),
        Command::Wigner(args) => single_mode_table(args, 0.0),
        Command::Qpd(args) => single_mode_table(&args.single, args.s),
        Command::Marginals(args) => cmd_marginals(args),
        Command::Amps(args) => cmd_amps(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Scissors(args) => cmd_scissors(args),
    }
}

const POTENTIAL_COLUMNS: [&str; 11] = [
    "p", "x_re", "x_im", "cp", "np", "sp", "sp_prime", "bp", "bp_prime", "uwep", "regime",
];

fn cmd_potentials(args: &PotentialsArgs) -> Result<()> {
    let params = args.channel.params()?;
    let mut table = Table::new(&POTENTIAL_COLUMNS);
    table.meta_f("q", params.q());
    table.meta_f("rsq", params.rsq());

    let points: Vec<(f64, C64)> = match (args.pprime, args.p, args.grids.len()) {
        (Some(pprime), base_p, n) => {
            if args.x.is_some() {
                return Err(Error::Domain(
                    "--x cannot combine with --pprime; the mixed state fixes its own coherence"
                        .into(),
                ));
            }
            let Some(base_p) = base_p else {
                return Err(Error::Domain("--pprime requires --p".into()));
            };
            table.meta_f("base_p", base_p);
            let pprimes = match (pprime, n) {
                (PprimeArg::Scan, 1) => {
                    table.meta_s("pprime", "scan");
                    args.grids[0].spec()?.values()
                }
                (PprimeArg::Scan, n) => {
                    return Err(Error::Domain(format!(
                        "--pprime scan needs exactly one --grid for the p' axis, got {n}"
                    )));
                }
                (PprimeArg::Value(pp), 0) => {
                    table.meta_f("pprime", pp);
                    vec![pp]
                }
                (PprimeArg::Value(_), n) => {
                    return Err(Error::Domain(format!(
                        "a fixed --pprime takes no --grid, got {n}"
                    )));
                }
            };
            pprimes
                .into_iter()
                .map(|pp| {
                    let state = sigma_prime(base_p, pp)?;
                    Ok((state.p(), state.x()))
                })
                .collect::<Result<Vec<_>>>()?
        }
        (None, Some(p), 0) => {
            let x = args.x.unwrap_or(XArg::Value(0.0)).resolve(p);
            vec![(p, c64(x, 0.0))]
        }
        (None, Some(p), 1) => {
            if args.x.is_some() {
                return Err(Error::Domain(
                    "--x conflicts with the x scan grid; drop one".into(),
                ));
            }
            args.grids[0].spec()?.values().into_iter().map(|x| (p, c64(x, 0.0))).collect()
        }
        (None, None, 1) => {
            let x = args.x.unwrap_or(XArg::Value(0.0));
            args.grids[0]
                .spec()?
                .values()
                .into_iter()
                .map(|p| (p, c64(x.resolve(p), 0.0)))
                .collect()
        }
        (None, None, 2) => {
            if args.x.is_some() {
                return Err(Error::Domain(
                    "--x cannot combine with a (p, x) product grid".into(),
                ));
            }
            let ps = args.grids[0].spec()?.values();
            let xs = args.grids[1].spec()?.values();
            ps.iter().flat_map(|&p| xs.iter().map(move |&x| (p, c64(x, 0.0)))).collect()
        }
        (None, None, 0) => {
            return Err(Error::Domain(
                "nothing to evaluate: give --p, or one or two --grid axes".into(),
            ));
        }
        (None, _, n) => {
            return Err(Error::Domain(format!("too many --grid axes: {n}")));
        }
    };

    let mut skipped = 0usize;
    for (p, x) in points {
        if x.norm() > (p * (1.0 - p)).sqrt() + 1e-12 {
            skipped += 1;
            continue;
        }
        let set = potential_set(p, x, &params)?;
        table.push(vec![
            Cell::F(p),
            Cell::F(x.re),
            Cell::F(x.im),
            Cell::F(set.cp),
            Cell::F(set.np),
            Cell::F(set.sp),
            Cell::F(set.sp_prime),
            Cell::F(set.bp),
            Cell::F(set.bp_prime),
            Cell::F(set.uwep),
            Cell::S(set.regime.to_string()),
        ]);
    }
    table.meta_i("skipped_outside_wedge", skipped as i64);
    args.out.emit(&table, Format::Csv)
}

fn cmd_map(args: &MapArgs) -> Result<()> {
    let [p_grid, x_grid] = &args.grids[..] else {
        return Err(Error::Domain(format!(
            "map needs exactly two --grid axes (p then x), got {}",
            args.grids.len()
        )));
    };
    let params = args.channel.params()?;
    let p_axis = p_grid.spec()?.values();
    let x_axis = x_grid.spec()?.values();
    let cells = regime_map(&params, &p_axis, &x_axis)?;

    let mut table = Table::new(&["p", "x", "regime"]);
    table.meta_f("q", params.q());
    table.meta_f("rsq", params.rsq());
    table.meta_s("p_grid", &p_grid.raw);
    table.meta_s("x_grid", &x_grid.raw);
    for (&p, row) in p_axis.iter().zip(&cells) {
        for (&x, cell) in x_axis.iter().zip(row) {
            let label = match cell {
                CellLabel::OutOfWedge => "outside".to_string(),
                CellLabel::Regime(r) => r.to_string(),
            };
            table.push(vec![Cell::F(p), Cell::F(x), Cell::S(label)]);
        }
    }
    args.out.emit(&table, Format::Csv)
}

/// The first and second axis of a two-axis scan: defaults when no grid is
/// given, one grid used for both axes, or one grid per axis.
fn two_axes(grids: &[GridArg], da: GridSpec, db: GridSpec) -> Result<(GridSpec, GridSpec)> {
    match grids {
        [] => Ok((da, db)),
        [g] => Ok((g.spec()?, g.spec()?)),
        [a, b] => Ok((a.spec()?, b.spec()?)),
        more => Err(Error::Domain(format!("at most two --grid axes, got {}", more.len()))),
    }
}

fn phase_space_default() -> GridSpec {
    GridSpec::new(-3.0, 3.0, 0.02).expect("valid default grid")
}

fn single_mode_table(args: &SingleModeArgs, s: f64) -> Result<()> {
    let x = args.x.unwrap_or(XArg::Value(0.0)).resolve(args.p);
    let sigma = vops(args.p, c64(x, 0.0))?;
    let (gx, gy) = two_axes(&args.grids, phase_space_default(), phase_space_default())?;
    let grid = qpd_grid_single(&sigma, s, &gx, &gy)?;

    let mut table = Table::new(&["x", "y", "value"]);
    table.meta_f("p", args.p);
    table.meta_f("x_re", x);
    table.meta_f("x_im", 0.0);
    table.meta_f("s", s);
    table.meta_f("min", grid.min());
    table.meta_f("max", grid.max());
    push_grid_rows(&mut table, &grid.axes[0], &grid.axes[1], &grid.values, None);
    args.out.emit(&table, Format::Csv)
}

/// Appends one row per grid point, outer axis first, with an optional leading
/// label cell.
fn push_grid_rows(
    table: &mut Table,
    outer: &[f64],
    inner: &[f64],
    values: &[f64],
    label: Option<&str>,
) {
    for (i, &a) in outer.iter().enumerate() {
        for (j, &b) in inner.iter().enumerate() {
            let mut row = Vec::with_capacity(4);
            if let Some(l) = label {
                row.push(Cell::S(l.to_string()));
            }
            row.extend([Cell::F(a), Cell::F(b), Cell::F(values[i * inner.len() + j])]);
            table.push(row);
        }
    }
}

fn two_mode_input(args: &TwoModeArgs) -> Result<(vops::states::TwoModeState, ChannelParams, f64)> {
    let params = args.channel.params()?;
    let x = args.x.unwrap_or(XArg::Value(0.0)).resolve(args.p);
    let rho = two_mode_closed_form(args.p, c64(x, 0.0), &params)?;
    Ok((rho, params, x))
}

fn cmd_marginals(args: &TwoModeArgs) -> Result<()> {
    let (rho, params, x) = two_mode_input(args)?;
    let (ga, gb) = two_axes(&args.grids, phase_space_default(), phase_space_default())?;

    let mut table = Table::new(&["pair", "a", "b", "value"]);
    table.meta_f("p", args.p);
    table.meta_f("x_re", x);
    table.meta_f("q", params.q());
    table.meta_f("rsq", params.rsq());
    let pairs = [
        (MarginalPair::X1Y1, "X1Y1"),
        (MarginalPair::X2Y2, "X2Y2"),
        (MarginalPair::X1X2, "X1X2"),
        (MarginalPair::Y1Y2, "Y1Y2"),
    ];
    for (pair, name) in pairs {
        let grid = marginal(&rho, pair, &ga, &gb)?;
        table.meta_f(&format!("{name}_min"), grid.min());
        table.meta_f(&format!("{name}_max"), grid.max());
        push_grid_rows(&mut table, &grid.axes[0], &grid.axes[1], &grid.values, Some(name));
    }
    args.out.emit(&table, Format::Csv)
}

fn cmd_amps(args: &TwoModeArgs) -> Result<()> {
    let (rho, params, x) = two_mode_input(args)?;
    let dt = GridSpec::new(0.0, PI, PI / 100.0).expect("valid default grid");
    let dp = GridSpec::new(0.0, 2.0 * PI, PI / 50.0).expect("valid default grid");
    let (gt, gp) = match &args.grids[..] {
        [] => (dt, dp),
        [g] => (g.spec()?, dp),
        [a, b] => (a.spec()?, b.spec()?),
        more => {
            return Err(Error::Domain(format!("at most two --grid axes, got {}", more.len())));
        }
    };
    let surface = amps_surface(&rho, &gt, &gp)?;

    let mut table = Table::new(&["theta", "phi", "value"]);
    table.meta_f("p", args.p);
    table.meta_f("x_re", x);
    table.meta_f("q", params.q());
    table.meta_f("rsq", params.rsq());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &surface.values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    table.meta_f("min", lo);
    table.meta_f("max", hi);
    push_grid_rows(&mut table, &surface.theta, &surface.phi, &surface.values, None);
    args.out.emit(&table, Format::Csv)
}

fn param_name(id: ParamId) -> &'static str {
    match id {
        ParamId::P => "p",
        ParamId::XMag => "x_mag",
        ParamId::XPhase => "x_phase",
        ParamId::Q => "q",
        ParamId::R => "r",
    }
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let rho = read_density(&args.input)?;
    let options = FitOptions { seed: args.seed, fix_q: args.q, ..FitOptions::default() };
    let fit = fit_model_with_options(&rho, &options)?;

    let mut table = Table::new(&[
        "p",
        "x_re",
        "x_im",
        "q",
        "r",
        "rsq",
        "fidelity",
        "iterations",
        "converged",
        "unidentifiable",
    ]);
    table.meta_s("input", &args.input.display().to_string());
    table.meta_u("seed", args.seed);
    table.meta_u("restarts", options.restarts as u64);
    if let Some(q) = args.q {
        table.meta_f("fixed_q", q);
    }
    let flags: Vec<&str> = fit.unidentifiable.iter().map(|&id| param_name(id)).collect();
    table.push(vec![
        Cell::F(fit.p),
        Cell::F(fit.x.re),
        Cell::F(fit.x.im),
        Cell::F(fit.q),
        Cell::F(fit.r),
        Cell::F(fit.r * fit.r),
        Cell::F(fit.fidelity),
        Cell::I(fit.iterations as i64),
        Cell::B(fit.converged),
        Cell::S(flags.join(";")),
    ]);
    args.out.emit(&table, Format::Json)?;

    if !fit.converged {
        return Err(Error::Numerical(format!(
            "fit did not converge (best fidelity {}); result written for inspection",
            fmt_f(fit.fidelity)
        )));
    }
    Ok(())
}

fn cmd_scissors(args: &ScissorsArgs) -> Result<()> {
    if !(0.0..1.0).contains(&args.p) {
        return Err(Error::Domain(format!(
            "target probability p = {} outside [0, 1)",
            args.p
        )));
    }
    let (n0, n1) = match args.counts[..] {
        [n0, n1] => (n0, n1),
        [n0] => (n0, 0),
        _ => (1, 0),
    };
    let alpha = c64((args.p / (1.0 - args.p)).sqrt(), 0.0);
    let (output, success) = scissors_output(alpha, args.cutoff)?;
    let target = vops(args.p, c64((args.p * (1.0 - args.p)).sqrt(), 0.0))?;
    let fidelity = qubit_fidelity(&output, &target);
    let dephased = dephase_mix(n0, n1, output.p())?;

    let mut table = Table::new(&[
        "output_p",
        "output_x_re",
        "output_x_im",
        "success",
        "target_fidelity",
        "dephased_p",
        "dephased_x_re",
        "dephased_x_im",
    ]);
    table.meta_f("target_p", args.p);
    table.meta_f("alpha", alpha.re);
    table.meta_u("cutoff", args.cutoff as u64);
    table.meta_u("n0", n0);
    table.meta_u("n1", n1);
    table.push(vec![
        Cell::F(output.p()),
        Cell::F(output.x().re),
        Cell::F(output.x().im),
        Cell::F(success),
        Cell::F(fidelity),
        Cell::F(dephased.p()),
        Cell::F(dephased.x().re),
        Cell::F(dephased.x().im),
    ]);
    args.out.emit(&table, Format::Json)
}

/// Squared Uhlmann fidelity of two qubits:
/// `F = Tr(ab) + 2 sqrt(det a det b)`.
fn qubit_fidelity(a: &vops::states::QubitState, b: &vops::states::QubitState) -> f64 {
    let (ma, mb) = (a.as_matrix(), b.as_matrix());
    let det = |m: &vops::linalg::CMat| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    let mut tr = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            tr += (ma[(i, j)] * mb[(j, i)]).re;
        }
    }
    (tr + 2.0 * (det(&ma).max(0.0) * det(&mb).max(0.0)).sqrt()).clamp(0.0, 1.0)
}
