use std::path::PathBuf;

use clap::{Args, ValueEnum};
use tapescan::meter::{load_tape, run, ControlProgram, Run};
use tapescan::treelang::{
    select_ascending, select_descending, stream_filter_backward, stream_filter_forward, Encoding, UnrankedTree,
};
use tapescan::xpath::{compile_filter, compile_selector, eval_reference, parse_corexpath, XPathError};

use crate::{format_error, internal_error, read_input, write_output, CmdResult, Failure, Global, EXIT_ACCEPT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Eval,
    FilterStream,
    SelectAsc,
    SelectDesc,
    Compile,
}

#[derive(Debug, Args)]
pub struct XPathArgs {
    #[arg(long)]
    pub query: String,
    /// Document file (not needed for compile).
    #[arg(long)]
    pub doc: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Eval)]
    pub mode: Mode,
    /// `lcns` streams forward, `fcns` backward; also the encoding of compiled automata.
    #[arg(long)]
    pub encoding: Option<Encoding>,
    /// Compile a selection pair instead of a filter.
    #[arg(long)]
    pub selector: bool,
}

fn xpath_error(e: XPathError) -> Failure {
    match e {
        XPathError::Tree(_) => internal_error(e),
        _ => format_error(e),
    }
}

fn indices(it: impl IntoIterator<Item = u64>) -> String {
    it.into_iter().map(|i| format!("{i}\n")).collect()
}

fn stream(program: impl ControlProgram, tree: &UnrankedTree, writable: bool) -> Result<Run, Failure> {
    let tape = load_tape(program.alphabet(), &tree.to_tokens(), writable).map_err(format_error)?;
    run(program, tape, None).map_err(internal_error)
}

pub fn cmd_xpath(g: &Global, a: &XPathArgs) -> CmdResult {
    let query = parse_corexpath(&a.query).map_err(format_error)?;
    if a.mode == Mode::Compile {
        let encoding = a.encoding.unwrap_or(Encoding::Fcns);
        let text = if a.selector {
            compile_selector(&query, encoding).map_err(xpath_error)?.to_string()
        } else {
            compile_filter(&query, encoding).map_err(xpath_error)?.to_string()
        };
        write_output(None, &text)?;
        return Ok(EXIT_ACCEPT);
    }
    let doc = a.doc.as_ref().ok_or_else(|| format_error("--doc is required in this mode"))?;
    let tree = UnrankedTree::parse(&read_input(doc)?).map_err(format_error)?;
    let mut tags = tree.labels().to_vec();
    tags.sort();
    tags.dedup();
    let run = match a.mode {
        Mode::Eval => {
            write_output(None, &indices(eval_reference(&query, &tree)))?;
            return Ok(EXIT_ACCEPT);
        }
        Mode::FilterStream => {
            let encoding = a.encoding.unwrap_or(Encoding::Lcns);
            let aut = compile_filter(&query, encoding).map_err(xpath_error)?;
            let run = match encoding {
                Encoding::Lcns => stream(stream_filter_forward(&aut, &tags).map_err(internal_error)?, &tree, false)?,
                Encoding::Fcns => stream(stream_filter_backward(&aut, &tags).map_err(internal_error)?, &tree, false)?,
            };
            println!("{}", run.report.accepted());
            run
        }
        Mode::SelectAsc => {
            let pair = compile_selector(&query, Encoding::Fcns).map_err(xpath_error)?;
            stream(select_ascending(&pair, &tags).map_err(internal_error)?, &tree, true)?
        }
        Mode::SelectDesc | Mode::Compile => {
            let pair = compile_selector(&query, Encoding::Lcns).map_err(xpath_error)?;
            stream(select_descending(&pair, &tags).map_err(internal_error)?, &tree, true)?
        }
    };
    if a.mode != Mode::FilterStream {
        write_output(None, &indices(run.output.records().iter().map(|r| r[0])))?;
    }
    g.finish(&run.report)
}
