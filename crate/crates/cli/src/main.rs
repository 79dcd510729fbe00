//! `vbe`: constants, verification sweeps and figure data from the command
//! line. Exit codes: 0 success, 1 verification failure, 2 usage error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vbe_core::constants::{
    power_bounds, power_centring_constant, power_constant, vbe_constant, vbe_d,
};
use vbe_core::ineqcheck::{sweep_delta, sweep_j_le_l, sweep_sublemma, DeltaBand};
use vbe_core::momfun::{p_eff, tp_eff, AltSplineParams, MomentFunction};
use vbe_core::oracle::suites::{concentration_suite, main_inequality_suite};
use vbe_core::report::{fmt_real, Cell, Format, SweepReport, Table};
use vbe_core::scalar::linear_grid;
use vbe_core::Error;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "vbe",
    version,
    about = "Sharp constants for martingale moment inequalities of order between 1 and 2"
)]
struct Cli {
    /// Output file; defaults to stdout, or to a file in $VBE_OUT_DIR when set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Directory for default-named output files.
    #[arg(long, global = true, env = "VBE_OUT_DIR", hide_env_values = true)]
    out_dir: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

impl FormatArg {
    fn format(self) -> Format {
        match self {
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
        }
    }

    fn ext(self) -> &'static str {
        match self {
            FormatArg::Csv => "csv",
            FormatArg::Jsonl => "jsonl",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Constants for the power |x|^p, p in (1, 2].
    Constants {
        #[arg(long)]
        p: f64,
    },
    /// Curve data behind a figure.
    Figure {
        #[arg(value_enum)]
        name: FigureName,
        #[command(flatten)]
        grid: GridArgs,
        /// First breakpoint of the alternating spline.
        #[arg(long, default_value_t = 0.1)]
        x1: f64,
    },
    /// Run a verification sweep; exits 1 on any violation.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
    },
    /// Power constants over a grid of p; exits 1 unless tC is strictly decreasing.
    Table {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Kernel value at one point for the extreme function psi_t (handy for spot checks).
    Kernel {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        x: f64,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct GridArgs {
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
}

impl GridArgs {
    fn resolve(self, default: (f64, f64, f64)) -> Result<Vec<f64>, Failure> {
        let from = self.from.unwrap_or(default.0);
        let to = self.to.unwrap_or(default.1);
        let step = self.step.unwrap_or(default.2);
        if !(from < to) || !(step > 0.0) || !from.is_finite() || !to.is_finite() {
            return Err(Failure::Usage(format!(
                "bad grid: need from < to and step > 0, got {from}, {to}, {step}"
            )));
        }
        if (to - from) / step > 1e7 {
            return Err(Failure::Usage("grid has more than 10^7 points".into()));
        }
        Ok(linear_grid(from, to, step))
    }

    fn echo(self, default: (f64, f64, f64)) -> String {
        format!(
            "from={} to={} step={}",
            self.from.unwrap_or(default.0),
            self.to.unwrap_or(default.1),
            self.step.unwrap_or(default.2)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FigureName {
    #[value(name = "fig1-left")]
    Fig1Left,
    #[value(name = "fig1-right")]
    Fig1Right,
    Fig2,
    Fig3,
    Fig4,
}

impl FigureName {
    fn label(self) -> &'static str {
        match self {
            FigureName::Fig1Left => "fig1-left",
            FigureName::Fig1Right => "fig1-right",
            FigureName::Fig2 => "fig2",
            FigureName::Fig3 => "fig3",
            FigureName::Fig4 => "fig4",
        }
    }

    fn default_grid(self) -> (f64, f64, f64) {
        match self {
            FigureName::Fig1Left => (0.0, 500.0, 0.5),
            // abscissa is log2 log_q(x + 1), so breakpoints sit at integers
            FigureName::Fig1Right => (0.0, 8.0, 0.01),
            _ => (1.01, 2.0, 0.01),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Delta,
    Sublemma,
    Jle,
    Oracle,
    Concentration,
    All,
}

enum Failure {
    Usage(String),
    Verify(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Configuration(_) | Error::Precondition(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Other(e.to_string()),
        }
    }
}

const TABLE_GRID: (f64, f64, f64) = (1.01, 2.0, 0.01);

fn header(table: Table, command: &str, seed: Option<u64>, config: String) -> Table {
    let t = table
        .meta("tool", format!("vbe {VERSION}"))
        .meta("command", command);
    let t = match seed {
        Some(s) => t.meta("seed", s),
        None => t.meta("seed", "none"),
    };
    t.meta("config", config)
}

fn constants(p: f64) -> Result<Table, Failure> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Failure::Usage(format!("p must lie in (1, 2], got {p}")));
    }
    let b = power_bounds(p)?;
    let tc = power_constant(p)?;
    let kappa = power_centring_constant(p)?;
    let mut t = Table::new(&["name", "value", "abs_tol"]);
    let rows: [(&str, f64, f64); 11] = [
        ("tC", b.tc, tc.abs_tol),
        ("x_p", b.x_p, 1e-13),
        ("lower_1", b.lower_1, 0.0),
        ("lower_2", b.lower_2, 0.0),
        ("upper_1", b.upper_1, 0.0),
        ("upper_2", b.upper_2, 0.0),
        ("W", b.w, 0.0),
        ("D", vbe_d(p)?, 1e-14),
        ("C_vBE", vbe_constant(p)?, 1e-13),
        ("tkappa", kappa.value, kappa.abs_tol),
        ("tkappa_c", kappa.witness("c").unwrap_or(f64::NAN), 1e-8),
    ];
    for (name, v, tol) in rows {
        t.push(vec![name.into(), v.into(), tol.into()])?;
    }
    Ok(t)
}

fn figure(name: FigureName, p_or_x: &[f64], x1: f64) -> Result<Table, Failure> {
    let mut t;
    match name {
        FigureName::Fig1Left => {
            let f = MomentFunction::alt_spline(AltSplineParams::new(x1)?);
            t = Table::new(&["x", "f2_alt", "pow_m2_3", "pow_m1_3"]);
            for &x in p_or_x {
                let y = x.abs() + 1.0;
                t.push(vec![
                    x.into(),
                    f.second_deriv(x).into(),
                    y.powf(-2.0 / 3.0).into(),
                    y.powf(-1.0 / 3.0).into(),
                ])?;
            }
        }
        FigureName::Fig1Right => {
            let params = AltSplineParams::new(x1)?;
            let lnq = params.q().ln();
            t = Table::new(&[
                "log2_logq_x1p",
                "x",
                "p_eff",
                "tp_eff",
                "three_halves",
                "five_thirds",
            ]);
            for &u in p_or_x {
                let x = (2f64.powf(u) * lnq).exp_m1();
                if !x.is_finite() || x <= 1.0 {
                    continue;
                }
                let approx = if x > x1 {
                    tp_eff(vbe_core::momfun::rho(&params, x)?)
                } else {
                    f64::NAN
                };
                t.push(vec![
                    u.into(),
                    x.into(),
                    p_eff(&params, x)?.into(),
                    approx.into(),
                    1.5.into(),
                    (5.0 / 3.0).into(),
                ])?;
            }
        }
        FigureName::Fig2 => {
            t = Table::new(&[
                "p",
                "tc_over_w",
                "lower_1_over_w",
                "lower_2_over_w",
                "upper_1_over_w",
                "upper_2_over_w",
                "one",
            ]);
            for &p in p_or_x {
                let b = power_bounds(p)?;
                let w = b.w;
                t.push(vec![
                    p.into(),
                    (b.tc / w).into(),
                    (b.lower_1 / w).into(),
                    (b.lower_2 / w).into(),
                    (b.upper_1 / w).into(),
                    (b.upper_2 / w).into(),
                    1.0.into(),
                ])?;
            }
        }
        FigureName::Fig3 => {
            t = Table::new(&["p", "tkappa", "one"]);
            for &p in p_or_x {
                t.push(vec![
                    p.into(),
                    power_centring_constant(p)?.value.into(),
                    1.0.into(),
                ])?;
            }
        }
        FigureName::Fig4 => {
            t = Table::new(&["p", "tc", "w", "min_2_c_vbe", "one"]);
            for &p in p_or_x {
                let b = power_bounds(p)?;
                t.push(vec![
                    p.into(),
                    b.tc.into(),
                    b.w.into(),
                    vbe_constant(p)?.min(2.0).into(),
                    1.0.into(),
                ])?;
            }
        }
    }
    Ok(t)
}

fn table(ps: &[f64]) -> Result<(Table, bool), Failure> {
    let mut t = Table::new(&[
        "p", "tc", "x_p", "lower_1", "lower_2", "upper_1", "upper_2", "w", "d", "c_vbe", "tkappa",
    ]);
    let mut prev = f64::INFINITY;
    let mut decreasing = true;
    for &p in ps {
        if !(p > 1.0 && p <= 2.0) {
            return Err(Failure::Usage(format!("grid point p = {p} outside (1, 2]")));
        }
        let b = power_bounds(p)?;
        decreasing &= b.tc < prev;
        prev = b.tc;
        t.push(vec![
            p.into(),
            b.tc.into(),
            b.x_p.into(),
            b.lower_1.into(),
            b.lower_2.into(),
            b.upper_1.into(),
            b.upper_2.into(),
            b.w.into(),
            vbe_d(p)?.into(),
            vbe_constant(p)?.into(),
            power_centring_constant(p)?.value.into(),
        ])?;
    }
    Ok((t, decreasing))
}

fn verify(suite: Suite, n: u64, seed: u64) -> Result<Vec<SweepReport>, Failure> {
    if n == 0 {
        return Err(Failure::Usage("--samples must be at least 1".into()));
    }
    let run = |s: Suite| -> Result<SweepReport, Failure> {
        Ok(match s {
            Suite::Delta => sweep_delta(n, seed, DeltaBand::Full)?.report,
            Suite::Sublemma => sweep_sublemma(n, seed)?,
            Suite::Jle => sweep_j_le_l(n, seed)?,
            Suite::Oracle => main_inequality_suite(n, seed)?,
            Suite::Concentration => concentration_suite(n, seed)?,
            Suite::All => unreachable!(),
        })
    };
    let suites = match suite {
        Suite::All => vec![
            Suite::Delta,
            Suite::Sublemma,
            Suite::Jle,
            Suite::Oracle,
            Suite::Concentration,
        ],
        s => vec![s],
    };
    suites.into_iter().map(run).collect()
}

fn sweep_table(reports: &[SweepReport]) -> Result<Table, Failure> {
    let mut t = Table::new(&[
        "sweep",
        "n",
        "seed",
        "max_violation",
        "argmax_point",
        "violations",
        "tolerance",
        "passed",
    ]);
    for r in reports {
        t.push(vec![
            r.sweep.clone().into(),
            Cell::Int(r.n as i64),
            Cell::Text(r.seed.to_string()),
            r.max_violation.into(),
            r.argmax_string().into(),
            Cell::Int(r.violations as i64),
            r.tolerance.into(),
            r.passed().into(),
        ])?;
    }
    Ok(t)
}

fn kernel(t: f64, s: f64, x: f64) -> Result<Table, Failure> {
    let f = MomentFunction::extreme(t)?;
    let l = vbe_core::constants::moment_kernel(&f, s, x)?;
    let mut tab = Table::new(&["t", "s", "x", "kernel", "normalized"]);
    tab.push(vec![
        t.into(),
        s.into(),
        x.into(),
        l.into(),
        (l / f.eval(s)).into(),
    ])?;
    Ok(tab)
}

fn emit(cli: &Cli, name: &str, table: &Table) -> Result<(), Failure> {
    let text = table.render(cli.format.format())?;
    let path = match (&cli.out, &cli.out_dir) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(dir.join(format!("{name}.{}", cli.format.ext()))),
        (None, None) => None,
    };
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)
                    .map_err(|e| Failure::Other(format!("{}: {e}", parent.display())))?;
            }
            fs::write(&p, text).map_err(|e| Failure::Other(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let fmt = cli.format.ext();
    match &cli.command {
        Command::Constants { p } => {
            let t = header(
                constants(*p)?,
                "constants",
                None,
                format!("p={p} format={fmt}"),
            );
            emit(cli, &format!("constants_p{p}"), &t)
        }
        Command::Figure { name, grid, x1 } => {
            let d = name.default_grid();
            let pts = grid.resolve(d)?;
            let t = figure(*name, &pts, *x1)?;
            let config = format!(
                "name={} {} x1={x1} format={fmt}",
                name.label(),
                grid.echo(d)
            );
            emit(cli, name.label(), &header(t, "figure", None, config))
        }
        Command::Table { grid } => {
            let pts = grid.resolve(TABLE_GRID)?;
            let (t, decreasing) = table(&pts)?;
            let t = header(
                t,
                "table",
                None,
                format!("{} format={fmt}", grid.echo(TABLE_GRID)),
            );
            emit(cli, "table", &t)?;
            if decreasing {
                Ok(())
            } else {
                Err(Failure::Verify(
                    "tC is not strictly decreasing on the grid".into(),
                ))
            }
        }
        Command::Verify {
            suite,
            samples,
            seed,
        } => {
            let reports = verify(*suite, *samples, *seed)?;
            let label = format!("{suite:?}").to_lowercase();
            let t = header(
                sweep_table(&reports)?,
                "verify",
                Some(*seed),
                format!("suite={label} samples={samples} format={fmt}"),
            );
            emit(cli, &format!("verify_{label}"), &t)?;
            let mut failed = Vec::new();
            for r in &reports {
                eprintln!(
                    "{} {}: n={} max={} violations={}",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.sweep,
                    r.n,
                    fmt_real(r.max_violation),
                    r.violations
                );
                if !r.passed() {
                    failed.push(format!("{} worst at {}", r.sweep, r.argmax_string()));
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Verify(failed.join("; ")))
            }
        }
        Command::Kernel { t, s, x } => {
            let tab = header(
                kernel(*t, *s, *x)?,
                "kernel",
                None,
                format!("t={t} s={s} x={x} format={fmt}"),
            );
            emit(cli, "kernel", &tab)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
