//! Batches of independent metered runs. With the `parallel` feature the
//! cases of a batch run on the rayon thread pool; without it they run in
//! order on the calling thread. Results are always returned in case order.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algorithms::records::encode_flat;
use crate::algorithms::{chase_indices, disj_chunked, disj_trivial, keysort_scan};
use crate::instances::{
    char_tokens, disj_oracle, make_chase_string, make_disj_string, make_sets_tree, BitSet, FunctionTable,
    SETS_TREE_QUERY,
};
use crate::meter::{load_tape, run, ControlProgram, Halt, RunReport};
use crate::treelang::{stream_filter_forward, BottomUpBDTA, Encoding, UnrankedTree};
use crate::xpath::{compile_filter, eval_reference, parse_corexpath, CoreXPath};

/// Applies `f` to every item in order on the current thread.
pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Applies `f` to every item on the rayon pool, keeping item order.
#[cfg(feature = "parallel")]
pub fn map_parallel<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// [`map_parallel`] when the `parallel` feature is on, else [`map_sequential`].
pub fn map_batch<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(items, f)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SweepError {
    #[error("unknown sweep family {0:?}")]
    Family(String),
    #[error("bad sweep parameter: {0}")]
    Parameter(String),
    #[error("case n={n} #{index}: {message}")]
    Case { n: usize, index: usize, message: String },
}

/// Algorithm and instance family of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Random bit vectors of length `n` against the one-scan decider.
    DisjTrivial,
    /// Random bit vectors against the chunked decider; chunk `⌈√n⌉` unless given.
    DisjChunked { chunk: Option<usize> },
    /// Random function tables of width `n` against the k-scan chase.
    Chase { k: usize },
    /// `n` random two-field tuples sorted with buffer `b`.
    KeySort { b: usize },
    /// Sets trees with `n` levels against the compiled one-scan filter.
    SetsTreeFilter,
}

impl Family {
    pub fn parse(name: &str, param: Option<usize>) -> Result<Self, SweepError> {
        let need = |what: &str| param.ok_or_else(|| SweepError::Parameter(format!("{name} needs --param {what}")));
        Ok(match name {
            "disj-trivial" => Family::DisjTrivial,
            "disj-chunked" => Family::DisjChunked { chunk: param },
            "chase" => Family::Chase { k: need("k")? },
            "keysort" => Family::KeySort { b: need("b")?.max(1) },
            "sets-tree-filter" => Family::SetsTreeFilter,
            other => return Err(SweepError::Family(other.to_string())),
        })
    }
}

impl FromStr for Family {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::parse(s, None)
    }
}

/// One instance of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepCase {
    pub n: usize,
    pub index: usize,
    pub seed: u64,
}

/// Per-case seed: a fixed mix of the sweep seed, size and instance index,
/// so rows do not depend on scheduling.
pub fn case_seed(seed: u64, n: usize, index: usize) -> u64 {
    let mut z = seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (index as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn cases(sizes: &[usize], per_size: usize, seed: u64) -> Vec<SweepCase> {
    sizes
        .iter()
        .flat_map(|&n| (0..per_size).map(move |index| SweepCase { n, index, seed: case_seed(seed, n, index) }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub n: usize,
    pub index: usize,
    pub report: RunReport,
    /// Whether the run's verdict or output matches the family's oracle.
    pub correct: bool,
    /// Tree depth for tree families.
    pub depth: Option<usize>,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "n,instance,tape_len,reversals,r_used,s_peak,r_times_s,verdict,correct,depth";

    pub fn rs(&self) -> u64 {
        self.report.r_used * self.report.s_peak
    }
}

fn verdict_name(h: Halt) -> &'static str {
    match h {
        Halt::Accept => "accept",
        Halt::Reject => "reject",
        Halt::OutputComplete => "output-complete",
    }
}

impl fmt::Display for SweepRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.report;
        write!(
            f,
            "{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.index,
            r.n,
            r.reversals,
            r.r_used,
            r.s_peak,
            self.rs(),
            verdict_name(r.halted),
            self.correct,
            self.depth.map(|d| d.to_string()).unwrap_or_default()
        )
    }
}

/// Random `x`, `y` of length `n`; half of the pairs are made disjoint.
pub fn random_disj_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (String, String) {
    let x: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let disjoint = rng.gen_bool(0.5);
    let y: Vec<bool> = x.iter().map(|&xi| rng.gen_bool(0.5) && !(disjoint && xi)).collect();
    let bits = |v: &[bool]| v.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
    (bits(&x), bits(&y))
}

/// Precomputed, shareable state of a sweep.
#[derive(Debug, Clone)]
pub struct Sweep {
    family: Family,
    tree_filter: Option<(CoreXPath, BottomUpBDTA)>,
}

impl Sweep {
    pub fn new(family: Family) -> Result<Self, SweepError> {
        let tree_filter = match family {
            Family::SetsTreeFilter => {
                let q = parse_corexpath(SETS_TREE_QUERY).map_err(|e| SweepError::Parameter(e.to_string()))?;
                let aut = compile_filter(&q, Encoding::Lcns).map_err(|e| SweepError::Parameter(e.to_string()))?;
                Some((q, aut))
            }
            _ => None,
        };
        Ok(Sweep { family, tree_filter })
    }

    pub fn run_case(&self, case: &SweepCase) -> Result<SweepRow, SweepError> {
        let mut rng = ChaCha8Rng::seed_from_u64(case.seed);
        let fail = |message: String| SweepError::Case {
            n: case.n,
            index: case.index,
            message,
        };
        let exec = |p: &dyn ControlProgram, tokens: &[String]| {
            let tape = load_tape(p.alphabet(), tokens, false).map_err(|e| fail(e.to_string()))?;
            run(p, tape, None).map_err(|e| fail(e.to_string()))
        };
        let row = |report: RunReport, correct: bool, depth: Option<usize>| SweepRow {
            n: case.n,
            index: case.index,
            report,
            correct,
            depth,
        };
        match self.family {
            Family::DisjTrivial | Family::DisjChunked { .. } => {
                let (x, y) = random_disj_pair(&mut rng, case.n);
                let tokens = char_tokens(&make_disj_string(&x, &y).map_err(|e| fail(e.to_string()))?);
                let run = match self.family {
                    Family::DisjChunked { chunk } => {
                        let c = chunk.unwrap_or_else(|| (case.n as f64).sqrt().ceil() as usize).max(1);
                        exec(&disj_chunked(c), &tokens)?
                    }
                    _ => exec(&disj_trivial(), &tokens)?,
                };
                Ok(row(run.report, run.report.accepted() == disj_oracle(&x, &y), None))
            }
            Family::Chase { k } => {
                let f = FunctionTable::random(case.n as u32, &mut rng).map_err(|e| fail(e.to_string()))?;
                let tokens = char_tokens(&make_chase_string(&f));
                let run = exec(&chase_indices(k), &tokens)?;
                Ok(row(run.report, run.report.accepted() == f.chase_holds(k), None))
            }
            Family::KeySort { b } => {
                let recs: Vec<Vec<u64>> = (0..case.n)
                    .map(|_| vec![rng.gen_range(0..case.n as u64 + 1), rng.gen_range(0..1024)])
                    .collect();
                let tokens = char_tokens(&encode_flat(&recs));
                let run = exec(&keysort_scan(b), &tokens)?;
                let mut expected = recs.clone();
                expected.sort_by_key(|r| r[0]);
                Ok(row(run.report, run.output.records() == expected.as_slice(), None))
            }
            Family::SetsTreeFilter => {
                let (query, aut) = self.tree_filter.as_ref().expect("compiled in new");
                let members = |rng: &mut ChaCha8Rng| (1..=case.n).filter(|_| rng.gen_bool(0.5)).collect::<Vec<_>>();
                let x = BitSet::new(case.n, members(&mut rng)).map_err(|e| fail(e.to_string()))?;
                let y = BitSet::new(case.n, members(&mut rng)).map_err(|e| fail(e.to_string()))?;
                let inst = make_sets_tree(case.n, &x, &y).map_err(|e| fail(e.to_string()))?;
                let tree = UnrankedTree::parse(&inst.document.concat()).map_err(|e| fail(e.to_string()))?;
                let mut tags = tree.labels().to_vec();
                tags.sort();
                tags.dedup();
                let program = stream_filter_forward(aut, &tags).map_err(|e| fail(e.to_string()))?;
                let run = exec(&program, &inst.document)?;
                let expected = !eval_reference(query, &tree).is_empty();
                Ok(row(run.report, run.report.accepted() == expected, Some(tree.depth())))
            }
        }
    }
}

/// Runs every case of a sweep, in parallel when the feature allows.
pub fn run_sweep(family: Family, cases: &[SweepCase]) -> Result<Vec<SweepRow>, SweepError> {
    let sweep = Arc::new(Sweep::new(family)?);
    map_batch(cases, |c| sweep.run_case(c)).into_iter().collect()
}

/// Same as [`run_sweep`] but always on the calling thread.
pub fn run_sweep_sequential(family: Family, cases: &[SweepCase]) -> Result<Vec<SweepRow>, SweepError> {
    let sweep = Sweep::new(family)?;
    map_sequential(cases, |c| sweep.run_case(c)).into_iter().collect()
}
