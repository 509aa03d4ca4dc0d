//! walshspec: derive index-2 instance parameters, emit exact Walsh spectra,
//! and run the verification suite.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 invalid instance,
//! 64 usage error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigUint;

use walsh_index2::closed_form::{self, Convention};
use walsh_index2::field::FieldCtx;
use walsh_index2::oracle;
use walsh_index2::params::validate_instance;
use walsh_index2::verify::{self, VerifyOptions};
use walsh_index2::Error;

#[derive(Parser)]
#[command(name = "walshspec", version, about = "Exact Walsh spectra of index-2 monomial trace functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(clap::Args)]
struct Common {
    /// Prime p.
    #[arg(long)]
    p: u64,
    /// Prime l = 3 mod 4, l != 3.
    #[arg(long)]
    l: u64,
    /// Output format.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Run oracle-backed paths when q = p^f is at most this bound.
    #[arg(long, default_value = "16777216")]
    verify_bound: String,
    /// Decimal digits for numeric embeddings and comparisons.
    #[arg(long, default_value_t = 30)]
    precision: u32,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Seed for the sampled checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Print the validated parameter record.
    Params(Common),
    /// Print the exact spectrum table.
    Spectrum(Common),
    /// Run the verification suite; nonzero exit on any failing check.
    Verify(Common),
    /// Print closed-form (and oracle, when feasible) Gauss sums.
    Gauss(Common),
    /// Compare the order-2 cyclotomic number closed forms with enumeration.
    Cyclo {
        /// Odd prime power to check; omit to run the sampled suite.
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the trace table of the beta powers.
    TraceTable(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap help/version are successful exits; anything else is usage
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(64),
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::BadL(_)
                | Error::NotIndexTwo { .. }
                | Error::InvalidInput(_)
                | Error::UnsupportedDiscriminant(_)
                | Error::NoRepresentation { .. } => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn parse_bound(s: &str) -> Result<BigUint, Error> {
    s.parse()
        .map_err(|_| Error::InvalidInput(format!("bad verify bound: {s}")))
}

fn emit(output: &Option<PathBuf>, contents: &str) -> Result<(), Error> {
    match output {
        Some(path) => std::fs::write(path, contents)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .map_err(|e| Error::InvalidInput(format!("stdout: {e}")))
        }
    }
}

/// Field-anchored convention when the oracle is feasible, standalone
/// otherwise; mirrors what `verify` does.
fn resolve_convention(
    params: &walsh_index2::params::Params,
    bound: &BigUint,
    seed: u64,
) -> Result<Convention, Error> {
    if params.q() <= *bound {
        let ctx = FieldCtx::build(params.p, params.f as usize, seed)?;
        let table = ctx.beta_table(params.n)?;
        Convention::from_field(params, &ctx, &table)
    } else {
        Convention::standalone(params)
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Params(c) => {
            let params = validate_instance(c.p, c.l)?;
            let case = match params.case {
                walsh_index2::params::ArithCase::Generic => serde_json::json!({"tag": "generic"}),
                walsh_index2::params::ArithCase::Special { delta } => {
                    serde_json::json!({"tag": "special", "delta": delta})
                }
            };
            let value = serde_json::json!({
                "p": params.p,
                "l": params.l,
                "N": params.n,
                "f": params.f,
                "h": params.h,
                "a": params.a.to_string(),
                "b": params.b.to_string(),
                "case": case,
                "q_digits": params.q().to_string().len(),
            });
            let text = match c.format {
                Format::Json | Format::Csv => format!("{}\n", serde_json::to_string_pretty(&value).unwrap()),
                Format::Text => format!(
                    "p = {}, l = {}: N = {}, f = {}, h = {}, a = {}, b = {}, case = {:?}\n",
                    params.p, params.l, params.n, params.f, params.h, params.a, params.b, params.case
                ),
            };
            emit(&c.output, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum(c) => {
            let params = validate_instance(c.p, c.l)?;
            let bound = parse_bound(&c.verify_bound)?;
            let conv = resolve_convention(&params, &bound, c.seed)?;
            let table = closed_form::spectrum_with(&params, &conv, c.precision);
            let text = match c.format {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&table.to_json()).unwrap()),
                Format::Csv => table.to_csv(),
                Format::Text => {
                    let mut out = String::new();
                    out.push_str(&format!(
                        "Walsh spectrum for p = {}, l = {} ({} distinct values)\n",
                        params.p,
                        params.l,
                        table.lines.len()
                    ));
                    for line in &table.lines {
                        out.push_str(&format!(
                            "  {:<14} freq {:<24} value {}  (~ {} + {}i)\n",
                            line.labels.join("+"),
                            line.frequency,
                            line.value,
                            line.approx.0,
                            line.approx.1
                        ));
                    }
                    out
                }
            };
            emit(&c.output, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(c) => {
            let bound = parse_bound(&c.verify_bound)?;
            let opts = VerifyOptions {
                verify_bound: bound,
                digits: c.precision,
                seed: c.seed,
            };
            let report = verify::run_verify(c.p, c.l, &opts)?;
            let text = match c.format {
                Format::Json | Format::Csv => {
                    format!("{}\n", serde_json::to_string_pretty(&report).unwrap())
                }
                Format::Text => verify::format_text(&report),
            };
            emit(&c.output, &text)?;
            if report.all_passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Gauss(c) => {
            let params = validate_instance(c.p, c.l)?;
            let bound = parse_bound(&c.verify_bound)?;
            let conv = resolve_convention(&params, &bound, c.seed)?;
            let feasible = params.q() <= bound;
            let brute_counts = if feasible {
                let ctx = FieldCtx::build(params.p, params.f as usize, c.seed)?;
                Some(oracle::count_matrix(&ctx, params.n)?)
            } else {
                None
            };
            let mut rows = Vec::new();
            for j in 1..params.n {
                let g = closed_form::gauss_sum_index2_with(&params, &conv, j)?;
                let approx = walsh_index2::embed::embed_algnum(&g, c.precision).to_f64_pair();
                let brute = brute_counts
                    .as_ref()
                    .map(|counts| oracle::brute_gauss_sum(counts, j, c.precision).map(|b| b.to_f64_pair()))
                    .transpose()?;
                rows.push(serde_json::json!({
                    "j": j,
                    "closed": serde_json::to_value(&g).unwrap(),
                    "closed_approx": [approx.0, approx.1],
                    "brute_approx": brute.map(|(re, im)| serde_json::json!([re, im])),
                }));
                if c.l > 23 && j > 3 * params.l {
                    break; // keep large-N output readable
                }
            }
            let value = serde_json::json!({"p": params.p, "l": params.l, "gauss_sums": rows});
            let text = match c.format {
                Format::Json | Format::Csv => format!("{}\n", serde_json::to_string_pretty(&value).unwrap()),
                Format::Text => {
                    let mut out = String::new();
                    for row in value["gauss_sums"].as_array().unwrap() {
                        out.push_str(&format!(
                            "G(chi^{}) ~ {} + {}i{}\n",
                            row["j"],
                            row["closed_approx"][0],
                            row["closed_approx"][1],
                            match &row["brute_approx"] {
                                serde_json::Value::Null => String::new(),
                                b => format!("   brute ~ {} + {}i", b[0], b[1]),
                            }
                        ));
                    }
                    out
                }
            };
            emit(&c.output, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Cyclo {
            p,
            seed,
            format,
            output,
        } => {
            let qs: Vec<u64> = match p {
                Some(q) => vec![q],
                None => verify::sample_prime_powers(seed, 20),
            };
            let mut rows = Vec::new();
            let mut all_ok = true;
            for q in qs {
                let closed = oracle::cyclotomic_numbers_closed(q);
                let brute = oracle::brute_cyclotomic_numbers(q)?;
                let ok = closed == brute;
                all_ok &= ok;
                rows.push(serde_json::json!({
                    "q": q, "closed": closed, "brute": brute, "match": ok,
                }));
            }
            let value = serde_json::json!({"cyclotomic_numbers": rows});
            let text = match format {
                Format::Json | Format::Csv => format!("{}\n", serde_json::to_string_pretty(&value).unwrap()),
                Format::Text => {
                    let mut out = String::new();
                    for row in value["cyclotomic_numbers"].as_array().unwrap() {
                        out.push_str(&format!(
                            "q = {:<8} closed = {} brute = {} {}\n",
                            row["q"],
                            row["closed"],
                            row["brute"],
                            if row["match"].as_bool().unwrap() { "ok" } else { "MISMATCH" }
                        ));
                    }
                    out
                }
            };
            emit(&output, &text)?;
            Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::TraceTable(c) => {
            let params = validate_instance(c.p, c.l)?;
            let bound = parse_bound(&c.verify_bound)?;
            let conv = resolve_convention(&params, &bound, c.seed)?;
            let table = closed_form::trace_beta_table_with(&params, &conv);
            let value = serde_json::json!({
                "p": params.p,
                "l": params.l,
                "epsilon": table.epsilon,
                "entries": {
                    "k0": table.zero,
                    "lH1_0": table.lh1_0,
                    "lH1_1": table.lh1_1,
                    "units": table.units,
                },
            });
            let text = match c.format {
                Format::Json | Format::Csv => format!("{}\n", serde_json::to_string_pretty(&value).unwrap()),
                Format::Text => format!(
                    "Tr(beta^i) for p = {}, l = {}: i = 0 -> {}; i in lH1^(0) -> {}; i in lH1^(1) -> {}; units -> {}{}\n",
                    params.p,
                    params.l,
                    table.zero,
                    table.lh1_0,
                    table.lh1_1,
                    table.units,
                    table
                        .epsilon
                        .map(|e| format!(" (epsilon = {e})"))
                        .unwrap_or_default()
                ),
            };
            emit(&c.output, &text)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
