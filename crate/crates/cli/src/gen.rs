use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tapescan::algorithms::records::encode_join_input;
use tapescan::instances::{
    disj_oracle, encode_relpair, join1_oracle, make_chase_string, make_disj_string, make_sets_tree,
    reduce_disj_to_join, sets_tree_oracle, BitSet, FunctionTable,
};
use tapescan::sweep::random_disj_pair;
use tapescan::treelang::UnrankedTree;

use crate::{format_error, internal_error, write_output, CmdResult, Failure, Global, EXIT_ACCEPT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenFamily {
    Disj,
    Chase,
    Relpair,
    SetsTree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RelFormat {
    Doc,
    Flat,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub family: GenFamily,
    /// Universe size (disj, relpair, sets-tree).
    #[arg(long)]
    pub n: Option<usize>,
    /// First set: a bitstring for disj/relpair, a member list like `1,3` for sets-tree.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub y: Option<String>,
    /// Word width of a chase table.
    #[arg(long)]
    pub m: Option<u32>,
    /// Chase table as comma-separated m-bit words.
    #[arg(long)]
    pub table: Option<String>,
    /// Chase depth used for the verdict.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Relation-pair output format.
    #[arg(long, value_enum, default_value_t = RelFormat::Doc)]
    pub format: RelFormat,
    /// Instance file; the sidecar goes to `<out>.meta.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| format_error(format!("missing --{flag}")))
}

fn bit_pair(g: &Global, a: &GenArgs, n: usize) -> Result<(String, String), Failure> {
    match (&a.x, &a.y) {
        (Some(x), Some(y)) => {
            if x.len() != n || y.len() != n {
                return Err(format_error(format!("--x and --y must have {n} bits")));
            }
            Ok((x.clone(), y.clone()))
        }
        (None, None) => Ok(random_disj_pair(&mut ChaCha8Rng::seed_from_u64(g.seed("random instance")?), n)),
        _ => Err(format_error("give both --x and --y or neither")),
    }
}

fn member_list(s: &str, n: usize) -> Result<BitSet, Failure> {
    let members = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|e| format_error(format!("member {t:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    BitSet::new(n, members).map_err(format_error)
}

fn member_pair(g: &Global, a: &GenArgs, n: usize) -> Result<(BitSet, BitSet), Failure> {
    match (&a.x, &a.y) {
        (Some(x), Some(y)) => Ok((member_list(x, n)?, member_list(y, n)?)),
        (None, None) => {
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed("random instance")?);
            let mut pick = || (1..=n).filter(|_| rng.gen_bool(0.5)).collect::<Vec<_>>();
            let x = BitSet::new(n, pick()).map_err(internal_error)?;
            let y = BitSet::new(n, pick()).map_err(internal_error)?;
            Ok((x, y))
        }
        _ => Err(format_error("give both --x and --y or neither")),
    }
}

/// Instance text plus its metadata record.
fn generate(g: &Global, a: &GenArgs) -> Result<(String, Value), Failure> {
    match a.family {
        GenFamily::Disj => {
            let n = need(a.n, "n")?;
            let (x, y) = bit_pair(g, a, n)?;
            let text = make_disj_string(&x, &y).map_err(format_error)?;
            let meta = json!({
                "family": "disj", "n": n, "length": text.len(), "split": n + 1,
                "x": x, "y": y, "verdict": disj_oracle(&x, &y),
            });
            Ok((text, meta))
        }
        GenFamily::Chase => {
            let table = match &a.table {
                Some(t) => {
                    let words: Vec<&str> = t.split(',').map(str::trim).collect();
                    FunctionTable::from_words(&words).map_err(format_error)?
                }
                None => {
                    let m = need(a.m, "m")?;
                    let mut rng = ChaCha8Rng::seed_from_u64(g.seed("random chase table")?);
                    FunctionTable::random(m, &mut rng).map_err(format_error)?
                }
            };
            if a.m.is_some_and(|m| m != table.width()) {
                return Err(format_error(format!("table words have width {}", table.width())));
            }
            let text = make_chase_string(&table);
            let meta = json!({
                "family": "chase", "m": table.width(), "length": text.len(),
                "split": table.width() + 1, "k": a.k,
                "chain": table.chain(a.k), "verdict": table.chase_holds(a.k),
            });
            Ok((text, meta))
        }
        GenFamily::Relpair => {
            let n = need(a.n, "n")?;
            let (x, y) = bit_pair(g, a, n)?;
            let xs = BitSet::from_bits(&x).map_err(format_error)?;
            let ys = BitSet::from_bits(&y).map_err(format_error)?;
            let (ra, rb) = reduce_disj_to_join(&xs, &ys);
            let verdict = join1_oracle(&ra, &rb).is_empty();
            let (text, length, split) = match a.format {
                RelFormat::Doc => {
                    let doc = encode_relpair(&ra, &rb);
                    let split = doc.iter().position(|t| t == "</rel1>").map_or(0, |i| i + 1);
                    (doc.concat(), doc.len(), split)
                }
                RelFormat::Flat => {
                    let rows = |r: &tapescan::instances::Relation| r.iter().map(|&(i, j)| vec![i, j]).collect::<Vec<_>>();
                    let text = encode_join_input(&rows(&ra), &rows(&rb));
                    let split = text.find('|').map_or(0, |i| i + 1);
                    let len = text.len();
                    (text, len, split)
                }
            };
            let meta = json!({
                "family": "relpair", "n": n, "length": length, "split": split,
                "x": x, "y": y, "verdict": verdict,
            });
            Ok((text, meta))
        }
        GenFamily::SetsTree => {
            let n = need(a.n, "n")?;
            let (x, y) = member_pair(g, a, n)?;
            let inst = make_sets_tree(n, &x, &y).map_err(format_error)?;
            let selected = sets_tree_oracle(&inst);
            let tree = UnrankedTree::parse(&inst.document.concat()).map_err(internal_error)?;
            let meta = json!({
                "family": "sets-tree", "n": n, "length": inst.document.len(), "split": inst.split,
                "x": x.members().collect::<Vec<_>>(), "y": y.members().collect::<Vec<_>>(),
                "depth": tree.depth(), "selected": selected, "verdict": !selected.is_empty(),
            });
            Ok((inst.document.concat(), meta))
        }
    }
}

pub fn cmd_gen(g: &Global, a: &GenArgs) -> CmdResult {
    let (text, meta) = generate(g, a)?;
    write_output(a.out.as_deref(), &format!("{text}\n"))?;
    let meta = serde_json::to_string(&meta).map_err(internal_error)?;
    match &a.out {
        Some(out) => {
            let mut sidecar = out.clone().into_os_string();
            sidecar.push(".meta.json");
            std::fs::write(&sidecar, format!("{meta}\n")).map_err(internal_error)?;
        }
        None => eprintln!("{meta}"),
    }
    Ok(EXIT_ACCEPT)
}
