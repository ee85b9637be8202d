//! Command implementations for the `maxplus` binary.
//!
//! Every command renders its report into a `String`; `main` only decides
//! where to write it. No arithmetic happens here beyond what the library
//! returns.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use maxplus::network::{
    build_fast_loop, build_m1, build_m2, build_p1, build_p2, lambda1_p1, lambda1_p2,
};
use maxplus::scalar::{format_decimal, format_rational, parse_rational};
use maxplus::simulator::{run, seed_for_zero_start, write_timetable_csv, CsvOptions};
use maxplus::spectral::{spectral_summary, Transient};
use maxplus::waiting::{
    classify, critical_params, recommend, w24_slope_sign, waiting_tables, wmin_at, Journey, Rule,
    SlopeSign,
};
use maxplus::{DemandProfile, MaxPlusMatrix, NetworkConfig, Rational, SyncModel};

/// Digits used for the decimal rendering next to every exact value.
pub const DECIMALS: usize = 6;

#[derive(Debug, Parser)]
#[command(
    name = "maxplus",
    version,
    about = "Max-plus analysis of two synchronized bus routes"
)]
pub struct Cli {
    /// Write the report to this file instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalue, irreducibility, cyclicity and transient of a matrix file.
    Eig {
        matrix_file: PathBuf,
        /// Search bound for the transient.
        #[arg(long, default_value_t = 64)]
        kmax: usize,
    },
    /// Print the system matrix of a model in matrix file format.
    Build(ModelArgs),
    /// Critical remainders, regime, Wmin and eigenvalues for given travel times.
    Analyze {
        #[arg(long, value_parser = rational)]
        t1: Rational,
        #[arg(long, value_parser = rational)]
        t2: Rational,
    },
    /// Departure timetable as CSV.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Events per state.
        #[arg(long, default_value_t = 6)]
        steps: usize,
        /// Add a decimal column with this many digits.
        #[arg(long)]
        decimals: Option<usize>,
        /// Include the artificial z states.
        #[arg(long)]
        all_states: bool,
    },
    /// Wmin row J2 sampled over r in [0, T1], as CSV.
    Sweep {
        #[arg(long, value_parser = rational)]
        t1: Rational,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 7)]
        points: usize,
    },
    /// Recommend a synchronization rule for a passenger mix.
    Optimize {
        #[arg(long, value_parser = rational)]
        t1: Rational,
        #[arg(long, value_parser = rational)]
        t2: Rational,
        #[arg(long, value_parser = rational, default_value = "0")]
        n1: Rational,
        #[arg(long, value_parser = rational, default_value = "0")]
        n2: Rational,
        #[arg(long, value_parser = rational, default_value = "0")]
        n3: Rational,
        #[arg(long, value_parser = rational, default_value = "0")]
        n4: Rational,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    M1,
    M2,
    P1,
    P2,
    Fast,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub case: Case,
    #[arg(long, value_parser = rational)]
    pub t1: Option<Rational>,
    #[arg(long, value_parser = rational)]
    pub t2: Option<Rational>,
    /// Synchronization parameter (p1, p2).
    #[arg(long)]
    pub l: Option<usize>,
    /// Buses on the fast loop.
    #[arg(long)]
    pub m: Option<usize>,
    /// Headway on the fast loop.
    #[arg(long, value_parser = rational)]
    pub delta: Option<Rational>,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn exact(q: &Rational) -> String {
    format!("{} ({})", format_rational(q), format_decimal(q, DECIMALS))
}

impl ModelArgs {
    fn missing(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        match self.case {
            Case::Fast => {
                if self.m.is_none() {
                    out.push("--m");
                }
                if self.delta.is_none() {
                    out.push("--delta");
                }
            }
            _ => {
                if self.t1.is_none() {
                    out.push("--t1");
                }
                if self.t2.is_none() {
                    out.push("--t2");
                }
                if matches!(self.case, Case::P1 | Case::P2) && self.l.is_none() {
                    out.push("--l");
                }
            }
        }
        out
    }

    pub fn config(&self) -> Result<Option<NetworkConfig>> {
        match (&self.t1, &self.t2) {
            (Some(t1), Some(t2)) => Ok(Some(NetworkConfig::decompose(t1.clone(), t2.clone())?)),
            _ => Ok(None),
        }
    }

    pub fn build(&self) -> Result<SyncModel> {
        let missing = self.missing();
        if !missing.is_empty() {
            bail!("case {:?} requires {}", self.case, missing.join(", "));
        }
        if self.case == Case::Fast {
            let m = self.m.expect("checked");
            let delta = self.delta.clone().expect("checked");
            return Ok(build_fast_loop(m, delta)?);
        }
        let cfg = self.config()?.expect("checked");
        Ok(match self.case {
            Case::M1 => build_m1(&cfg),
            Case::M2 => build_m2(&cfg),
            Case::P1 => build_p1(&cfg, self.l.expect("checked"))?,
            Case::P2 => build_p2(&cfg, self.l.expect("checked"))?,
            Case::Fast => unreachable!(),
        })
    }

    fn describe(&self) -> String {
        let mut parts = vec![format!(
            "case={}",
            format!("{:?}", self.case).to_lowercase()
        )];
        if let Some(t1) = &self.t1 {
            parts.push(format!("t1={}", format_rational(t1)));
        }
        if let Some(t2) = &self.t2 {
            parts.push(format!("t2={}", format_rational(t2)));
        }
        if let Some(l) = self.l {
            parts.push(format!("l={l}"));
        }
        if let Some(m) = self.m {
            parts.push(format!("m={m}"));
        }
        if let Some(d) = &self.delta {
            parts.push(format!("delta={}", format_rational(d)));
        }
        parts.join(" ")
    }
}

/// Runs one command and returns its full output.
pub fn execute(command: &Command) -> Result<String> {
    match command {
        Command::Eig { matrix_file, kmax } => {
            let text = std::fs::read_to_string(matrix_file)
                .with_context(|| format!("cannot read {}", matrix_file.display()))?;
            let a = MaxPlusMatrix::parse(&text)
                .with_context(|| format!("in {}", matrix_file.display()))?;
            cmd_eig(&a, *kmax)
        }
        Command::Build(model) => Ok(model.build()?.matrix.to_string()),
        Command::Analyze { t1, t2 } => cmd_analyze(t1, t2),
        Command::Simulate {
            model,
            steps,
            decimals,
            all_states,
        } => cmd_simulate(model, *steps, *decimals, *all_states),
        Command::Sweep { t1, n, points } => cmd_sweep(t1, *n, *points),
        Command::Optimize {
            t1,
            t2,
            n1,
            n2,
            n3,
            n4,
        } => cmd_optimize(t1, t2, [n1.clone(), n2.clone(), n3.clone(), n4.clone()]),
    }
}

pub fn cmd_eig(a: &MaxPlusMatrix, kmax: usize) -> Result<String> {
    let s = spectral_summary(a, kmax)?;
    let mut out = String::new();
    let lambda = match s.lambda.as_finite() {
        Some(q) => exact(q),
        None => "-inf".to_string(),
    };
    writeln!(out, "dimension = {}", a.rows())?;
    writeln!(out, "lambda = {lambda}")?;
    writeln!(out, "irreducible = {}", s.irreducible)?;
    match s.cyclicity {
        Some(c) => writeln!(out, "cyclicity = {c}")?,
        None => writeln!(out, "cyclicity = n/a (reducible)")?,
    }
    match s.transient {
        Some(Transient::Found(m)) => writeln!(out, "transient = {m}")?,
        Some(Transient::NotFound { k_max }) => {
            writeln!(out, "transient = not found within kmax = {k_max}")?
        }
        None => writeln!(out, "transient = n/a (reducible)")?,
    }
    Ok(out)
}

pub fn cmd_analyze(t1: &Rational, t2: &Rational) -> Result<String> {
    let cfg = NetworkConfig::decompose(t1.clone(), t2.clone())?;
    let crit = critical_params(&cfg)?;
    let tables = waiting_tables(&cfg, cfg.n())?;
    let n = cfg.n();
    let mut out = String::new();
    writeln!(out, "T1 = {}", exact(cfg.t1()))?;
    writeln!(out, "T2 = {}", exact(cfg.t2()))?;
    writeln!(out, "n = {n}")?;
    writeln!(out, "r = {}", exact(cfg.r()))?;
    writeln!(out, "r_c = {}", exact(&crit.r_c))?;
    writeln!(out, "r_s = {}", exact(&crit.r_s))?;
    writeln!(out, "regime = {}", crit.regime)?;
    let slope = match w24_slope_sign(&cfg) {
        SlopeSign::Increasing => "INCREASING",
        SlopeSign::Decreasing => "DECREASING",
        SlopeSign::Constant => "CONSTANT",
    };
    writeln!(out, "w24 slope in l = {slope}")?;
    let ls: Vec<String> = tables
        .wmin_l
        .iter()
        .map(|l| l.map_or("any".to_string(), |v| v.to_string()))
        .collect();
    writeln!(
        out,
        "Wmin (rows J1..J4, columns S1..S4 at l = {}):",
        ls.join(", ")
    )?;
    for j in Journey::ALL {
        let cells: Vec<String> = Rule::ALL
            .iter()
            .map(|&s| exact(tables.wmin_entry(j, s)))
            .collect();
        writeln!(out, "  {j}: {}", cells.join("  "))?;
    }
    writeln!(out, "lambda1 per rule:")?;
    for rule in Rule::ALL {
        let l = rule.canonical_l(n);
        let (family, lambda) = match rule {
            Rule::S1 | Rule::S2 => ("P1", lambda1_p1(&cfg, l)),
            Rule::S3 | Rule::S4 => ("P2", lambda1_p2(&cfg, l)),
        };
        writeln!(out, "  {rule} ({family}, l = {l}): {}", exact(&lambda))?;
    }
    Ok(out)
}

pub fn cmd_simulate(
    model: &ModelArgs,
    steps: usize,
    decimals: Option<usize>,
    all_states: bool,
) -> Result<String> {
    if steps < 2 {
        bail!("--steps must be at least 2");
    }
    let sync = model.build()?;
    let traj = run(&sync, &seed_for_zero_start(&sync), steps - 1)?;
    let mut buf = Vec::new();
    use std::io::Write as _;
    writeln!(buf, "# {} steps={steps}", model.describe())?;
    if let Some(cfg) = model.config()? {
        writeln!(buf, "# n={} r={}", cfg.n(), format_rational(cfg.r()))?;
    }
    write_timetable_csv(
        &traj,
        CsvOptions {
            decimals,
            include_artificial: all_states,
        },
        &mut buf,
    )?;
    Ok(String::from_utf8(buf)?)
}

pub fn cmd_sweep(t1: &Rational, n: u64, points: usize) -> Result<String> {
    if points < 2 {
        bail!("--points must be at least 2");
    }
    if n == 0 {
        bail!("--n must be at least 1");
    }
    // Reuse the library's critical remainders via a representative config.
    let cfg = NetworkConfig::decompose(t1.clone(), t1 * Rational::from_integer(n.into()))?;
    let crit = critical_params(&cfg)?;
    let mut out = String::new();
    writeln!(out, "# t1={} n={n} points={points}", format_rational(t1))?;
    writeln!(out, "# r_c={}", format_rational(&crit.r_c))?;
    writeln!(out, "# r_s={}", format_rational(&crit.r_s))?;
    writeln!(out, "r,w21,w22,w24,regime")?;
    let last = Rational::from_integer((points as u64 - 1).into());
    for k in 0..points {
        let r = t1 * Rational::from_integer((k as u64).into()) / &last;
        let row = &wmin_at(t1, n, &r)[Journey::J2.index()];
        writeln!(
            out,
            "{},{},{},{},{}",
            format_rational(&r),
            format_rational(&row[0]),
            format_rational(&row[1]),
            format_rational(&row[3]),
            classify(&r, &crit.r_c, &crit.r_s)
        )?;
    }
    Ok(out)
}

pub fn cmd_optimize(t1: &Rational, t2: &Rational, demand: [Rational; 4]) -> Result<String> {
    let cfg = NetworkConfig::decompose(t1.clone(), t2.clone())?;
    let demand = DemandProfile::new(demand)?;
    let rec = recommend(&cfg, &demand)?;
    let mut out = String::new();
    writeln!(out, "regime = {}", rec.critical.regime)?;
    writeln!(out, "rule = {}", rec.rule)?;
    writeln!(out, "l = {}", rec.l)?;
    writeln!(out, "condition = {}", rec.reason.describe())?;
    writeln!(out, "rationale = {}", rec.rationale)?;
    if !rec.ties.is_empty() {
        let ties: Vec<String> = rec.ties.iter().map(ToString::to_string).collect();
        writeln!(out, "equally good = {}", ties.join(", "))?;
    }
    writeln!(out, "mean waiting per rule:")?;
    for rule in Rule::ALL {
        writeln!(out, "  {rule}: {}", exact(&rec.averages[rule.index()]))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn model(case: Case) -> ModelArgs {
        ModelArgs {
            case,
            t1: None,
            t2: None,
            l: None,
            m: None,
            delta: None,
        }
    }

    #[test]
    fn missing_flags_are_listed() {
        let err = model(Case::P2).build().unwrap_err().to_string();
        assert!(
            err.contains("--t1") && err.contains("--t2") && err.contains("--l"),
            "{err}"
        );
        let err = model(Case::Fast).build().unwrap_err().to_string();
        assert!(err.contains("--m") && err.contains("--delta"), "{err}");
    }

    #[test]
    fn analyze_rejects_bad_ordering() {
        assert!(cmd_analyze(&q("5"), &q("3")).is_err());
    }

    #[test]
    fn optimize_rejects_empty_demand() {
        let zero = || q("0");
        assert!(cmd_optimize(&q("3"), &q("25/3"), [zero(), zero(), zero(), zero()]).is_err());
    }

    #[test]
    fn sweep_validation() {
        assert!(cmd_sweep(&q("3"), 2, 1).is_err());
        assert!(cmd_sweep(&q("3"), 0, 5).is_err());
    }

    #[test]
    fn eig_reports_unbounded_transient() {
        let a = MaxPlusMatrix::parse("2 2\n0 -30\n-30 -1\n").unwrap();
        let out = cmd_eig(&a, 10).unwrap();
        assert!(
            out.contains("transient = not found within kmax = 10"),
            "{out}"
        );
    }
}
