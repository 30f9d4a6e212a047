//! The single-scan baseline: copy the whole input into internal memory and
//! decide it there.

use std::fmt;
use std::sync::Arc;

use crate::instances::{decode_relpair, join1_oracle};
use crate::meter::{Action, Alphabet, Arena, ControlProgram, Output, Read, Reg, StateId};

const COPY: Reg = Reg(0);

/// Decides an input given as its token sequence.
pub type Decider = dyn Fn(&[&str]) -> bool + Send + Sync;

pub struct LoadAndSolve {
    sigma: Arc<Alphabet>,
    decider: Box<Decider>,
}

impl fmt::Debug for LoadAndSolve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LoadAndSolve").field("sigma", &self.sigma).finish_non_exhaustive()
    }
}

pub fn load_and_solve<F>(sigma: Arc<Alphabet>, decider: F) -> LoadAndSolve
where
    F: Fn(&[&str]) -> bool + Send + Sync + 'static,
{
    LoadAndSolve {
        sigma,
        decider: Box::new(decider),
    }
}

impl ControlProgram for LoadAndSolve {
    fn alphabet(&self) -> Arc<Alphabet> {
        self.sigma.clone()
    }

    fn states(&self) -> u32 {
        1
    }

    fn internal_alphabet(&self) -> u32 {
        self.sigma.len().max(2) as u32
    }

    fn step(&self, _control: StateId, read: Read, mem: &mut Arena, _out: &mut Output) -> Action {
        match read.symbol {
            Some(sym) => {
                mem.push(COPY, sym);
                Action::right(0)
            }
            None => {
                let tokens: Vec<&str> = mem.cells(COPY).iter().map(|&c| self.sigma.token(c)).collect();
                if (self.decider)(&tokens) {
                    Action::accept()
                } else {
                    Action::reject()
                }
            }
        }
    }
}

/// Tokens of relation-pair documents.
pub fn relpair_alphabet() -> Arc<Alphabet> {
    let tags = ["rels", "rel1", "rel2", "tuple", "no1", "no2"];
    let tokens = tags
        .iter()
        .flat_map(|t| [format!("<{t}>"), format!("</{t}>")])
        .chain(["<0/>".to_string(), "<1/>".to_string()]);
    Arc::new(Alphabet::new(tokens).expect("distinct tags"))
}

/// Accepts well-formed relation pairs whose first-column join is empty.
pub fn join_emptiness(tokens: &[&str]) -> bool {
    decode_relpair(tokens).is_ok_and(|(a, b)| join1_oracle(&a, &b).is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::disj::{disj_alphabet, disj_trivial};
    use crate::instances::{char_tokens, disj_oracle, encode_relpair, Relation};
    use crate::meter::{load_tape, run};

    #[test]
    fn join_emptiness_in_one_scan() {
        let p = load_and_solve(relpair_alphabet(), join_emptiness);
        type Case<'a> = (&'a [(u64, u64)], &'a [(u64, u64)], bool);
        let cases: [Case; 3] = [
            (&[(1, 5)], &[(1, 7)], false),
            (&[(1, 5)], &[(2, 7)], true),
            (&[], &[(2, 7)], true),
        ];
        for (a, b, empty) in cases {
            let a: Relation = a.iter().copied().collect();
            let b: Relation = b.iter().copied().collect();
            let doc = encode_relpair(&a, &b);
            let r = run(&p, load_tape(relpair_alphabet(), &doc, false).unwrap(), None)
                .unwrap()
                .report;
            assert_eq!(r.accepted(), empty);
            assert_eq!(r.r_used, 1);
            assert_eq!(r.s_peak, doc.len() as u64);
        }
    }

    #[test]
    fn always_true_accepts() {
        let p = load_and_solve(disj_alphabet(), |_| true);
        let r = run(&p, load_tape(disj_alphabet(), &char_tokens("0#1#"), false).unwrap(), None)
            .unwrap()
            .report;
        assert!(r.accepted());
        assert_eq!(r.r_used, 1);
    }

    #[test]
    fn agrees_with_trivial_disjointness() {
        let p = load_and_solve(disj_alphabet(), |t| {
            let s = t.concat();
            match s.split_once('#') {
                Some((x, y)) => !x.is_empty() && !y.contains('#') && disj_oracle(x, y),
                None => false,
            }
        });
        for n in 1..=8usize {
            for mask in 0u32..1 << (2 * n) {
                let bits: String = (0..2 * n).map(|i| if mask >> i & 1 == 1 { '1' } else { '0' }).collect();
                let input = format!("{}#{}", &bits[..n], &bits[n..]);
                let tape = load_tape(disj_alphabet(), &char_tokens(&input), false).unwrap();
                let a = run(&p, tape.clone(), None).unwrap().report;
                let b = run(disj_trivial(), tape, None).unwrap().report;
                assert_eq!(a.accepted(), b.accepted(), "{input}");
            }
        }
    }
}
