//! `carries`: command-line front end for the balanced-carries library.
//!
//! Exit status: 0 success, 1 argument error, 2 failed verification,
//! 3 enumeration budget exceeded.

mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use balanced_carries::chain::{
    brute_force_matrix, matrix_power, transition_matrix, transition_matrix_binomial, BUDGET_ENV,
};
use balanced_carries::numeral::{parse_digit_text, to_balanced, BalancedNumeral};
use balanced_carries::pointprocess::{
    a_closed, a_exact, brute_force_string, parse_binary_pattern, parse_signed_pattern,
    signed_pattern_probability, string_probability,
};
use balanced_carries::rational::{to_f64, to_pq};
use balanced_carries::simulate::{simulate_chain, simulate_column, SimConfig};
use balanced_carries::spectral::{foulkes_table, signed_eulerian, stationary, verify_spectrum, SpectralTables};
use balanced_carries::wire::{int_matrix_csv, int_matrix_strings, matrix_csv, MatrixWire};
use balanced_carries::Error;

use output::{Envelope, Output};

/// Relative tolerance for `ai --method both`.
const CLOSED_FORM_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "carries", version, about = "Exact balanced-digit carries toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Args, Debug)]
struct FormatArg {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert between decimal integers and balanced digits.
    Convert {
        #[arg(long)]
        base: u64,
        #[arg(long = "int", allow_hyphen_values = true, conflicts_with = "digits")]
        int: Option<BigInt>,
        /// Comma-separated signed digits, most significant first (e.g. 1,-2,-2).
        #[arg(long, allow_hyphen_values = true)]
        digits: Option<String>,
        #[command(flatten)]
        fmt: FormatArg,
    },
    /// Print the carries transition matrix (or a power of it).
    Matrix {
        #[arg(long = "n")]
        n: usize,
        #[arg(long)]
        base: u64,
        #[arg(long, value_enum, default_value_t = Method::Poly)]
        method: Method,
        #[arg(long, default_value_t = 1)]
        power: u32,
        #[command(flatten)]
        fmt: FormatArg,
    },
    /// Left or right eigenvector table for even n.
    Eigen {
        #[arg(long = "n")]
        n: usize,
        #[arg(long, value_enum)]
        side: Side,
        #[command(flatten)]
        fmt: FormatArg,
    },
    /// Stationary distribution for even n.
    Stationary {
        #[arg(long = "n")]
        n: usize,
        #[command(flatten)]
        fmt: FormatArg,
    },
    /// Hyperoctahedral Foulkes table, checked against its recurrence.
    Foulkes {
        #[arg(long = "n")]
        n: usize,
        #[command(flatten)]
        fmt: FormatArg,
    },
    /// Check every spectral identity exactly; exit 2 on failure.
    Verify {
        #[arg(long = "n")]
        n: usize,
        #[arg(long)]
        base: u64,
        #[command(flatten)]
        fmt: FormatArg,
    },
    /// Run probabilities a_i of the column carries process.
    Ai {
        #[arg(long)]
        base: u64,
        #[arg(long = "max-i")]
        max_i: usize,
        #[arg(long, value_enum, default_value_t = AiMethod::Both)]
        method: AiMethod,
        #[command(flatten)]
        fmt: FormatArg,
    },
    /// Probability of a carry pattern down a column (0/1 or over +-0).
    Stringprob {
        #[arg(long)]
        base: u64,
        #[arg(long, allow_hyphen_values = true)]
        pattern: String,
        /// Also enumerate all remainder strings and compare.
        #[arg(long = "check-oracle")]
        check_oracle: bool,
        #[command(flatten)]
        fmt: FormatArg,
    },
    /// Seeded Monte Carlo comparison against exact values.
    Simulate {
        #[command(subcommand)]
        kind: SimKind,
    },
}

#[derive(Subcommand, Debug)]
enum SimKind {
    /// Carries across the top when adding n long numbers.
    Chain {
        #[arg(long)]
        base: u64,
        #[arg(long = "n")]
        n: usize,
        #[arg(long)]
        digits: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        fmt: FormatArg,
    },
    /// Carries down a single column of random digits.
    Column {
        #[arg(long)]
        base: u64,
        #[arg(long)]
        height: usize,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        fmt: FormatArg,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Poly,
    Binomial,
    Brute,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Side {
    Left,
    Right,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum AiMethod {
    Exact,
    Closed,
    Both,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } => 3,
        Error::InvariantViolation(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.status)
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::BudgetExceeded { .. }) {
                eprintln!("(raise the limit with {BUDGET_ENV}=<cases>)");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cmd: Command) -> Result<Output, Error> {
    match cmd {
        Command::Convert { base, int, digits, fmt } => convert(base, int, digits, fmt.format),
        Command::Matrix { n, base, method, power, fmt } => matrix(n, base, method, power, fmt.format),
        Command::Eigen { n, side, fmt } => eigen(n, side, fmt.format),
        Command::Stationary { n, fmt } => stationary_cmd(n, fmt.format),
        Command::Foulkes { n, fmt } => foulkes(n, fmt.format),
        Command::Verify { n, base, fmt } => verify(n, base, fmt.format),
        Command::Ai { base, max_i, method, fmt } => ai(base, max_i, method, fmt.format),
        Command::Stringprob { base, pattern, check_oracle, fmt } => {
            stringprob(base, &pattern, check_oracle, fmt.format)
        }
        Command::Simulate { kind } => simulate(kind),
    }
}

fn convert(base: u64, int: Option<BigInt>, digits: Option<String>, format: Format) -> Result<Output, Error> {
    let x = match (int, digits) {
        (Some(m), None) => to_balanced(&m, base)?,
        (None, Some(text)) => {
            BalancedNumeral::from_digits(base, &parse_digit_text(&text)?)?
        }
        _ => return Err(Error::InvalidArgument("give exactly one of --int or --digits".into())),
    };
    let value = x.value();
    let payload = json!({
        "base": base,
        "digits": x.digits(),
        "value": value.to_string(),
    });
    let env = Envelope::new("convert", json!({ "base": base }), "balanced-expansion", payload);
    Ok(match format {
        Format::Json => env.json(),
        Format::Csv => Output::ok(format!("value,digits\n{},\"{}\"\n", value, x.digit_text())),
        Format::Pretty => Output::ok(format!(
            "{value} = [{}] (balanced base {base})\n",
            x.digit_text()
        )),
    })
}

fn matrix(n: usize, base: u64, method: Method, power: u32, format: Format) -> Result<Output, Error> {
    let k = match method {
        Method::Poly => transition_matrix(n, base)?,
        Method::Binomial => transition_matrix_binomial(n, base)?,
        Method::Brute => brute_force_matrix(n, base)?,
    };
    let k = if power == 1 { k } else { matrix_power(&k, power) };
    let method_name = format!("{method:?}").to_lowercase();
    Ok(match format {
        Format::Json => Envelope::new(
            "matrix",
            json!({ "n": n, "base": base, "power": power }),
            &method_name,
            serde_json::to_value(MatrixWire::from(&k)).expect("serializable"),
        )
        .json(),
        Format::Csv => Output::ok(matrix_csv(&k)),
        Format::Pretty => {
            let states: Vec<String> = k.states().map(|s| s.to_string()).collect();
            let rows: Vec<Vec<String>> = k
                .entries()
                .iter()
                .map(|r| r.iter().map(to_pq).collect())
                .collect();
            Output::ok(format!(
                "K for n={n}, base {} (method {method_name}); rows i, columns j\n{}",
                k.base(),
                output::table(&states, &states, &rows)
            ))
        }
    })
}

fn eigen(n: usize, side: Side, format: Format) -> Result<Output, Error> {
    let t = SpectralTables::new(n)?;
    let half = (n / 2) as i64;
    let (m, what) = match side {
        Side::Left => (&t.v, "left"),
        Side::Right => (&t.u, "right"),
    };
    Ok(match format {
        Format::Json => Envelope::new(
            "eigen",
            json!({ "n": n, "side": what }),
            "closed-form",
            json!({
                "n": n,
                "side": what,
                "offset": half,
                "layout": if side == Side::Left { "row j = eigenvector for 1/b^j, column = state" } else { "row = state, column j = eigenvector for 1/b^j" },
                "rows": int_matrix_strings(m),
            }),
        )
        .json(),
        Format::Csv => Output::ok(int_matrix_csv(m)),
        Format::Pretty => {
            let states: Vec<String> = (-half..=half).map(|s| s.to_string()).collect();
            let js: Vec<String> = (0..=n).map(|j| format!("j={j}")).collect();
            let cells = int_matrix_strings(m);
            let body = match side {
                Side::Left => output::table(&js, &states, &cells),
                Side::Right => output::table(&states, &js, &cells),
            };
            Output::ok(format!("{what} eigenvectors, n={n}\n{body}"))
        }
    })
}

fn stationary_cmd(n: usize, format: Format) -> Result<Output, Error> {
    let pi = stationary(n)?;
    let half = (n / 2) as i64;
    let eul: Vec<String> = (0..=n)
        .map(|j| signed_eulerian(n, j).map(|v| v.to_string()))
        .collect::<Result<_, _>>()?;
    let probs: Vec<String> = pi.probabilities.iter().map(to_pq).collect();
    Ok(match format {
        Format::Json => Envelope::new(
            "stationary",
            json!({ "n": n }),
            "signed-eulerian",
            json!({
                "n": n,
                "offset": half,
                "probabilities": probs,
                "decimal": pi.probabilities.iter().map(|p| format!("{:.12}", to_f64(p))).collect::<Vec<_>>(),
                "signed_eulerian": eul,
            }),
        )
        .json(),
        Format::Csv | Format::Pretty => {
            let mut s = String::from("state,probability,signed_eulerian\n");
            for (t, p) in probs.iter().enumerate() {
                s += &format!("{},{p},{}\n", t as i64 - half, eul[t]);
            }
            Output::ok(s)
        }
    })
}

fn foulkes(n: usize, format: Format) -> Result<Output, Error> {
    let t = foulkes_table(n)?;
    Ok(match format {
        Format::Json => Envelope::new(
            "foulkes",
            json!({ "n": n }),
            "direct+recurrence",
            json!({ "n": n, "layout": "rows[j][i] = w^n_j[i]", "rows": int_matrix_strings(&t.w) }),
        )
        .json(),
        Format::Csv => Output::ok(int_matrix_csv(&t.w)),
        Format::Pretty => {
            let is: Vec<String> = (0..=n).map(|i| format!("i={i}")).collect();
            let js: Vec<String> = (0..=n).map(|j| format!("j={j}")).collect();
            Output::ok(format!("w^{n}_j[i]\n{}", output::table(&js, &is, &int_matrix_strings(&t.w))))
        }
    })
}

fn verify(n: usize, base: u64, format: Format) -> Result<Output, Error> {
    let report = verify_spectrum(n, base)?;
    let status = if report.passed() { 0 } else { 2 };
    let mut out = match format {
        Format::Json => Envelope::new(
            "verify",
            json!({ "n": n, "base": base }),
            "exact",
            json!({ "passed": report.passed(), "report": report }),
        )
        .json(),
        Format::Csv | Format::Pretty => {
            let mut s = String::from("identity,passed,first_failure\n");
            for c in &report.checks {
                let f = c
                    .first_failure
                    .as_ref()
                    .map(|f| format!("j={} state={}: {}", f.j, f.state, f.detail))
                    .unwrap_or_default();
                s += &format!("{},{},{}\n", c.name, c.passed, f);
            }
            Output::ok(s)
        }
    };
    out.status = status;
    Ok(out)
}

fn ai(base: u64, max_i: usize, method: AiMethod, format: Format) -> Result<Output, Error> {
    if max_i == 0 {
        return Err(Error::InvalidArgument("--max-i must be >= 1".into()));
    }
    let mut rows = Vec::new();
    let mut disagreements = 0;
    let first = if method == AiMethod::Closed { 2 } else { 1 };
    for i in first..=max_i {
        let exact = (method != AiMethod::Closed).then(|| a_exact(i, base)).transpose()?;
        let closed = if method != AiMethod::Exact && i >= 2 { Some(a_closed(i, base)?) } else { None };
        let rel = match (&exact, closed) {
            (Some(e), Some(c)) => {
                let ef = to_f64(e);
                Some(((c - ef) / ef).abs())
            }
            _ => None,
        };
        let agree = rel.map(|r| r <= CLOSED_FORM_TOL);
        if agree == Some(false) {
            disagreements += 1;
        }
        rows.push(json!({
            "i": i,
            "exact": exact.as_ref().map(to_pq),
            "exact_decimal": exact.as_ref().map(|e| format!("{:.17e}", to_f64(e))),
            "closed_decimal": closed.map(|c| format!("{c:.17e}")),
            "relative_error": rel.map(|r| format!("{r:.3e}")),
            "agree": agree,
        }));
    }
    let method_name = format!("{method:?}").to_lowercase();
    let mut out = match format {
        Format::Json => Envelope::new(
            "ai",
            json!({ "base": base, "max_i": max_i }),
            &method_name,
            json!({ "base": base, "tolerance": format!("{CLOSED_FORM_TOL:e}"), "disagreements": disagreements, "rows": rows }),
        )
        .json(),
        Format::Csv | Format::Pretty => {
            let mut s = String::from("i,exact,exact_decimal,closed_decimal,relative_error,agree\n");
            let f = |v: &Value| match v {
                Value::Null => String::new(),
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            for r in &rows {
                s += &format!(
                    "{},{},{},{},{},{}\n",
                    f(&r["i"]),
                    f(&r["exact"]),
                    f(&r["exact_decimal"]),
                    f(&r["closed_decimal"]),
                    f(&r["relative_error"]),
                    f(&r["agree"])
                );
            }
            Output::ok(s)
        }
    };
    if disagreements > 0 {
        out.status = 2;
    }
    Ok(out)
}

fn stringprob(base: u64, pattern: &str, check_oracle: bool, format: Format) -> Result<Output, Error> {
    let binary = pattern.chars().all(|c| c == '0' || c == '1');
    let (kind, method, prob, oracle) = if binary {
        let t = parse_binary_pattern(pattern)?;
        let p = string_probability(&t, base)?;
        let o = check_oracle.then(|| brute_force_string(&t, base)).transpose()?;
        ("binary", "determinant", p, o)
    } else {
        let s = parse_signed_pattern(pattern)?;
        let p = signed_pattern_probability(&s, base)?;
        ("signed", "enumeration", p, None)
    };
    let agree = oracle.as_ref().map(|o| *o == prob);
    let status = if agree == Some(false) { 2 } else { 0 };
    let mut out = match format {
        Format::Json => Envelope::new(
            "stringprob",
            json!({ "base": base, "pattern": pattern, "check_oracle": check_oracle }),
            method,
            json!({
                "pattern": pattern,
                "kind": kind,
                "probability": to_pq(&prob),
                "decimal": format!("{:.17e}", to_f64(&prob)),
                "oracle": oracle.as_ref().map(to_pq),
                "agree": agree,
            }),
        )
        .json(),
        Format::Csv | Format::Pretty => Output::ok(format!(
            "pattern,kind,probability,decimal,oracle\n{pattern},{kind},{},{:.12},{}\n",
            to_pq(&prob),
            to_f64(&prob),
            oracle.as_ref().map(to_pq).unwrap_or_default()
        )),
    };
    out.status = status;
    Ok(out)
}

fn simulate(kind: SimKind) -> Result<Output, Error> {
    let (cfg, report, format) = match kind {
        SimKind::Chain { base, n, digits, trials, seed, fmt } => {
            let cfg = SimConfig::chain(base, n, digits, trials, seed);
            let r = simulate_chain(&cfg)?;
            (cfg, r, fmt.format)
        }
        SimKind::Column { base, height, trials, seed, fmt } => {
            let cfg = SimConfig::column(base, height, trials, seed);
            let r = simulate_column(&cfg)?;
            (cfg, r, fmt.format)
        }
    };
    let ok = report.all_within_3sigma() && report.digits_uniform;
    Ok(match format {
        Format::Json => Envelope::new(
            "simulate",
            serde_json::to_value(&cfg).expect("serializable"),
            report.kind,
            json!({ "within_3sigma": ok, "report": report }),
        )
        .json(),
        Format::Csv | Format::Pretty => {
            let mut s = String::from("label,hits,samples,empirical,exact,deviation,sigma,within_3sigma\n");
            for e in report.estimates.iter().chain(&report.occupancy) {
                s += &format!(
                    "{},{},{},{},{},{},{},{}\n",
                    e.label,
                    e.hits,
                    e.samples,
                    to_pq(&e.empirical),
                    e.exact.as_ref().map(to_pq).unwrap_or_default(),
                    e.deviation.map(|d| format!("{d:.3e}")).unwrap_or_default(),
                    e.sigma.map(|d| format!("{d:.3e}")).unwrap_or_default(),
                    e.within_3sigma.map(|b| b.to_string()).unwrap_or_default(),
                );
            }
            Output::ok(s)
        }
    })
}
