use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde_json::json;
use tapescan::algorithms::records::{encode_join_input, parse_flat, parse_join_input, Record};
use tapescan::algorithms::{
    chase_indices, disj_chunked, disj_trivial, join_emptiness, join_via_sort, keysort_scan, load_and_solve,
    relpair_alphabet, verify_chase_certificate,
};
use tapescan::instances::{char_tokens, decode_relpair, parse_chase_string};
use tapescan::meter::{
    ceil_log2, check_budget, extract_protocol, load_tape, replay_protocol, run, ControlProgram, Run,
};
use tapescan::sweep::{cases, run_sweep, Family, SweepError, SweepRow};
use tapescan::treelang::lex;

use crate::{
    format_error, internal_error, read_input, write_output, CmdResult, Failure, Global, EXIT_ACCEPT, EXIT_BUDGET,
    EXIT_INTERNAL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    DisjTrivial,
    DisjChunked,
    Chase,
    ChaseCert,
    Keysort,
    Join,
    LoadSolve,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Chunk size c, chase depth k or buffer size b.
    #[arg(long)]
    pub param: Option<usize>,
    #[arg(long)]
    pub input: PathBuf,
    /// Guessed chain `j1,…,j(k+1)` for chase-cert.
    #[arg(long)]
    pub cert: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub param: Option<usize>,
    /// Comma-separated instance sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Instances per size.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SortArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Buffer size in tuples.
    #[arg(long, default_value_t = 1)]
    pub b: usize,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[arg(long)]
    pub param: Option<usize>,
    #[arg(long)]
    pub input: PathBuf,
    /// Last cell of the left party; defaults to the first `#` or `|`.
    #[arg(long)]
    pub boundary: Option<usize>,
}

type Program = Box<dyn ControlProgram>;

fn check_disj(text: &str) -> Result<usize, Failure> {
    let (x, y) = text
        .split_once('#')
        .ok_or_else(|| format_error("disjointness input needs one '#'"))?;
    let binary = |s: &str| s.chars().all(|c| c == '0' || c == '1');
    if !binary(x) || !binary(y) || x.len() != y.len() {
        return Err(format_error("disjointness input must be x#y with equal-length bitstrings"));
    }
    Ok(x.len())
}

fn relpair_tokens(text: &str) -> Result<Vec<String>, Failure> {
    let tokens: Vec<String> = lex(text).map_err(format_error)?.iter().map(ToString::to_string).collect();
    decode_relpair(&tokens).map_err(format_error)?;
    Ok(tokens)
}

fn cert_chain(cert: Option<&str>) -> Result<Vec<u64>, Failure> {
    let cert = cert.ok_or_else(|| format_error("chase-cert needs --cert"))?;
    cert.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|e| format_error(format!("cert entry {t:?}: {e}"))))
        .collect()
}

/// Validates the input for `algo` and builds the program with its tape tokens.
fn prepare(algo: Algo, param: Option<usize>, cert: Option<&str>, text: &str) -> Result<(Program, Vec<String>), Failure> {
    let chars = || char_tokens(text);
    Ok(match algo {
        Algo::DisjTrivial => {
            check_disj(text)?;
            (Box::new(disj_trivial()), chars())
        }
        Algo::DisjChunked => {
            let n = check_disj(text)?;
            let c = param.unwrap_or_else(|| (n as f64).sqrt().ceil() as usize).max(1);
            (Box::new(disj_chunked(c)), chars())
        }
        Algo::Chase | Algo::ChaseCert => {
            parse_chase_string(text).ok_or_else(|| format_error("input is not a chase string 1^m#words"))?;
            let k = param.unwrap_or(1);
            let program: Program = if algo == Algo::Chase {
                Box::new(chase_indices(k))
            } else {
                Box::new(verify_chase_certificate(k, &cert_chain(cert)?).map_err(format_error)?)
            };
            (program, chars())
        }
        Algo::Keysort => {
            parse_flat(text).map_err(format_error)?;
            (Box::new(keysort_scan(param.unwrap_or(1).max(1))), chars())
        }
        Algo::Join => {
            let text = flat_join_input(text)?;
            (Box::new(join_via_sort(param.unwrap_or(1).max(1))), char_tokens(&text))
        }
        Algo::LoadSolve => (Box::new(load_and_solve(relpair_alphabet(), join_emptiness)), relpair_tokens(text)?),
    })
}

/// Accepts a flat `A|B` input or a relation-pair document and returns the flat form.
fn flat_join_input(text: &str) -> Result<String, Failure> {
    if text.starts_with('<') {
        let tokens = relpair_tokens(text)?;
        let (a, b) = decode_relpair(&tokens).map_err(format_error)?;
        let rows = |r: &tapescan::instances::Relation| r.iter().map(|&(i, j)| vec![i, j]).collect::<Vec<Record>>();
        return Ok(encode_join_input(&rows(&a), &rows(&b)));
    }
    parse_join_input(text).map_err(format_error)?;
    Ok(text.to_string())
}

fn execute(program: &Program, tokens: &[String]) -> Result<Run, Failure> {
    let tape = load_tape(program.alphabet(), tokens, false).map_err(format_error)?;
    run(&**program, tape, None).map_err(internal_error)
}

fn print_records(records: &[Vec<u64>]) -> Result<(), Failure> {
    let text: String = records
        .iter()
        .map(|r| r.iter().map(u64::to_string).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    write_output(None, &text)
}

pub fn cmd_run(g: &Global, a: &RunArgs) -> CmdResult {
    let text = read_input(&a.input)?;
    let (program, tokens) = prepare(a.algo, a.param, a.cert.as_deref(), &text)?;
    let run = execute(&program, &tokens)?;
    print_records(run.output.records())?;
    g.finish(&run.report)
}

pub fn cmd_sort(g: &Global, a: &SortArgs) -> CmdResult {
    let text = read_input(&a.input)?;
    let (program, tokens) = prepare(Algo::Keysort, Some(a.b), None, &text)?;
    let run = execute(&program, &tokens)?;
    print_records(run.output.records())?;
    g.finish(&run.report)
}

pub fn cmd_join(g: &Global, a: &SortArgs) -> CmdResult {
    let text = read_input(&a.input)?;
    let (program, tokens) = prepare(Algo::Join, Some(a.b), None, &text)?;
    let run = execute(&program, &tokens)?;
    print_records(run.output.records())?;
    g.finish(&run.report)
}

pub fn cmd_sweep(g: &Global, a: &SweepArgs) -> CmdResult {
    let seed = g.seed("sweep")?;
    let family = Family::parse(&a.family, a.param).map_err(format_error)?;
    let rows = run_sweep(family, &cases(&a.sizes, a.count, seed)).map_err(|e| match e {
        SweepError::Case { .. } => internal_error(e),
        _ => format_error(e),
    })?;
    let mut csv = format!("{}\n", SweepRow::CSV_HEADER);
    for row in &rows {
        csv.push_str(&format!("{row}\n"));
    }
    write_output(a.out.as_deref(), &csv)?;
    if let Some(budget) = g.budget()? {
        if rows.iter().any(|r| !check_budget(&r.report, &budget).passed()) {
            return Ok(EXIT_BUDGET);
        }
    }
    Ok(EXIT_ACCEPT)
}

pub fn cmd_protocol(a: &ProtocolArgs) -> CmdResult {
    let text = read_input(&a.input)?;
    let (program, tokens) = prepare(a.algo, a.param, None, &text)?;
    let boundary = match a.boundary {
        Some(b) => b,
        None => tokens
            .iter()
            .position(|t| t == "#" || t == "|")
            .map(|i| i + 1)
            .ok_or_else(|| format_error("no '#' or '|' in the input; give --boundary"))?,
    };
    if boundary == 0 || boundary > tokens.len() {
        return Err(format_error(format!("boundary must lie in 1..={}", tokens.len())));
    }
    let tape = load_tape(program.alphabet(), &tokens, false).map_err(format_error)?;
    let cells = tape.cells().to_vec();
    let transcript = extract_protocol(&*program, tape, boundary).map_err(internal_error)?;
    let (left, right) = cells.split_at(boundary);
    let replayed = replay_protocol(&&*program, left, right, false, &transcript).map_err(internal_error)?;
    let cell_bits = ceil_log2(program.internal_alphabet() as u64);
    let bound = transcript.r_used * (transcript.state_bits as u64 + transcript.peak_snapshot_bits(cell_bits));
    let summary = json!({
        "boundary": boundary,
        "messages": transcript.messages.len(),
        "state_bits": transcript.state_bits,
        "total_bits": transcript.total_bits,
        "bound_bits": bound,
        "outcome": transcript.outcome,
        "r_used": transcript.r_used,
        "s_peak": transcript.s_peak,
        "replay": replayed,
    });
    println!("{summary}");
    Ok(if replayed { EXIT_ACCEPT } else { EXIT_INTERNAL })
}
