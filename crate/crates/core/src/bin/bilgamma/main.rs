use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bilgamma::hedging::{hedge_delta, HedgeSettings};
use bilgamma::measures::{solve, MeasureKind, MeasureParams, MeasureSolution};
use bilgamma::pricer::{lewis_price_report, vol_surface, OptionKind, OptionSpec};
use bilgamma::validate::run_validation;
use bilgamma::{Error, Market, RiskNeutralLaw, RunConfig};

/// Bilateral Gamma option pricing and hedging.
#[derive(Parser)]
#[command(name = "bilgamma", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Model and market configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for a martingale measure and print its parameters.
    Solve {
        #[command(flatten)]
        common: Common,
        /// esscher, memm, bilateral, p-optimal:<p> or mmm.
        #[arg(long, short, value_parser = parse_kind)]
        measure: MeasureKind,
    },
    /// Price a European option.
    Price {
        #[command(flatten)]
        common: Common,
        #[arg(long, short, value_parser = parse_kind, default_value = "bilateral")]
        measure: MeasureKind,
        #[arg(long, short = 'k')]
        strike: f64,
        /// Maturity in years.
        #[arg(long, short = 't')]
        maturity: f64,
        #[arg(long)]
        put: bool,
    },
    /// Write call prices and annualized implied volatilities on a grid as CSV.
    Surface {
        #[command(flatten)]
        common: Common,
        #[arg(long, short, value_parser = parse_kind, default_value = "bilateral")]
        measure: MeasureKind,
        /// Comma-separated strikes; defaults to 80% to 120% of spot in 5% steps.
        #[arg(long, value_delimiter = ',')]
        strikes: Option<Vec<f64>>,
        /// Comma-separated maturities in years.
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2")]
        maturities: Vec<f64>,
        /// Output file; standard output when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Quadratic hedge ratios under the minimal martingale measure, as CSV.
    Hedge {
        #[command(flatten)]
        common: Common,
        #[arg(long, short = 'k')]
        strike: f64,
        /// Maturity in years.
        #[arg(long, short = 't')]
        maturity: f64,
        /// Current time in years.
        #[arg(long, default_value_t = 0.0)]
        time: f64,
        /// Comma-separated spot prices; defaults to the configured spot.
        #[arg(long, value_delimiter = ',')]
        spots: Option<Vec<f64>>,
        #[arg(long)]
        put: bool,
    },
    /// Run the self-checks for a configuration.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_kind(s: &str) -> Result<MeasureKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Formats with 12 significant digits, switching to exponent notation for
/// very large or small magnitudes.
fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        return format!("{x:.11e}");
    }
    let s = format!("{x:.*}", (11 - exp).max(0) as usize);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(&common.config)?;
    cfg.apply_env()?;
    Ok(cfg)
}

fn pricing_law(kind: MeasureKind, cfg: &RunConfig) -> Result<RiskNeutralLaw, Error> {
    if kind == MeasureKind::Memm {
        return Err(Error::Unsupported(
            "option prices under the minimal entropy measure are not available: its law has no closed-form characteristic function in the bilateral Gamma class".into(),
        ));
    }
    Ok(solve(kind, &cfg.model, &cfg.market, &cfg.solver)?.law)
}

fn print_law(out: &mut impl Write, law: &RiskNeutralLaw) -> io::Result<()> {
    writeln!(out, "law = {law}")?;
    if let Ok(components) = law.components() {
        for (i, c) in components.iter().enumerate() {
            let prefix = if components.len() == 1 {
                String::new()
            } else {
                format!("component{}.", i + 1)
            };
            writeln!(out, "{prefix}alpha_plus = {}", c.alpha_plus())?;
            writeln!(out, "{prefix}lambda_plus = {}", c.lambda_plus())?;
            writeln!(out, "{prefix}alpha_minus = {}", c.alpha_minus())?;
            writeln!(out, "{prefix}lambda_minus = {}", c.lambda_minus())?;
        }
    }
    Ok(())
}

fn report_solution(out: &mut impl Write, sol: &MeasureSolution, m: &Market) -> Result<(), Error> {
    writeln!(out, "measure = {}", sol.kind)?;
    match sol.params {
        MeasureParams::Esscher { theta } | MeasureParams::Memm { theta } => writeln!(out, "theta = {theta}")?,
        MeasureParams::Bilateral { theta_plus, theta_minus } => {
            writeln!(out, "theta_plus = {theta_plus}")?;
            writeln!(out, "theta_minus = {theta_minus}")?;
        }
        MeasureParams::MinimalMartingale { c } => writeln!(out, "c = {c}")?,
    }
    match (sol.kind, sol.objective) {
        (MeasureKind::POptimal(_), Some(d)) => writeln!(out, "p_distance = {d}")?,
        (_, Some(h)) => writeln!(out, "entropy = {h}")?,
        (_, None) => {}
    }
    print_law(out, &sol.law)?;
    if let RiskNeutralLaw::TiltedLevy { .. } = sol.law {
        return Ok(());
    }
    writeln!(out, "martingale_residual = {:e}", sol.law.martingale_residual(m)?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Error> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Solve { common, measure } => {
            let cfg = load(&common)?;
            let sol = solve(measure, &cfg.model, &cfg.market, &cfg.solver)?;
            report_solution(&mut out, &sol, &cfg.market)?;
        }
        Command::Price {
            common,
            measure,
            strike,
            maturity,
            put,
        } => {
            let cfg = load(&common)?;
            let law = pricing_law(measure, &cfg)?;
            let kind = if put { OptionKind::Put } else { OptionKind::Call };
            let opt = OptionSpec::new(strike, cfg.to_model_time(maturity), kind)?;
            let r = lewis_price_report(&law, &cfg.market, &opt, &cfg.contour)?;
            writeln!(out, "price = {}", r.price)?;
            writeln!(out, "nu = {}", r.nu)?;
            writeln!(out, "truncation = {}", r.truncation)?;
            writeln!(out, "evaluations = {}", r.evaluations)?;
        }
        Command::Surface {
            common,
            measure,
            strikes,
            maturities,
            out: path,
        } => {
            let cfg = load(&common)?;
            let law = pricing_law(measure, &cfg)?;
            let s0 = cfg.market.s0();
            let strikes = strikes.unwrap_or_else(|| (0..=8).map(|i| s0 * (0.8 + 0.05 * i as f64)).collect());
            let model_t: Vec<f64> = maturities.iter().map(|&y| cfg.to_model_time(y)).collect();
            let surf = vol_surface(&law, &cfg.market, &strikes, &model_t, &cfg.contour).map_err(|e| match e {
                Error::GridPoint { maturity, strike, source } => Error::GridPoint {
                    maturity: maturity / cfg.periods_per_year,
                    strike,
                    source,
                },
                other => other,
            })?;
            let annualize = cfg.periods_per_year.sqrt();
            let mut csv = String::from("maturity,strike,price,implied_vol\n");
            for (i, years) in maturities.iter().enumerate() {
                for (j, k) in strikes.iter().enumerate() {
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        sig12(*years),
                        sig12(*k),
                        sig12(surf.prices[i][j]),
                        sig12(surf.implied_vols[i][j] * annualize)
                    ));
                }
            }
            match path {
                Some(p) => {
                    let mut f = BufWriter::new(File::create(p)?);
                    f.write_all(csv.as_bytes())?;
                    f.flush()?;
                }
                None => out.write_all(csv.as_bytes())?,
            }
        }
        Command::Hedge {
            common,
            strike,
            maturity,
            time,
            spots,
            put,
        } => {
            let cfg = load(&common)?;
            let sol = solve(MeasureKind::MinimalMartingale, &cfg.model, &cfg.market, &cfg.solver)?;
            let MeasureParams::MinimalMartingale { c } = sol.params else {
                unreachable!("minimal martingale solve returns its constant")
            };
            let kind = if put { OptionKind::Put } else { OptionKind::Call };
            let opt = OptionSpec::new(strike, cfg.to_model_time(maturity), kind)?;
            let hs = HedgeSettings {
                contour: cfg.contour,
                ..HedgeSettings::default()
            };
            writeln!(out, "spot,delta")?;
            for spot in spots.unwrap_or_else(|| vec![cfg.market.s0()]) {
                let d = hedge_delta(&cfg.model, c, &cfg.market, &opt, cfg.to_model_time(time), spot, &hs)?;
                writeln!(out, "{},{}", sig12(spot), sig12(d))?;
            }
        }
        Command::Validate { common } => {
            let cfg = load(&common)?;
            let report = run_validation(&cfg);
            writeln!(out, "{report}")?;
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_no_solution() { 2 } else { 1 })
        }
    }
}
