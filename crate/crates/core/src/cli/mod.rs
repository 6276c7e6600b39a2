//! Line-oriented instruction loop over a [`DynamicGraph`].
//!
//! One instruction per line:
//!
//! | verb | operands | output |
//! | --- | --- | --- |
//! | `a` / `add` | `u v` | none |
//! | `d` / `delete` | `u v` | none |
//! | `q` / `query` | `u v` | `1` or `0` |
//! | `n` / `neighbors` | `u` | sorted targets, space separated |
//! | `r` / `reverse` | `v` | sorted sources, space separated |
//! | `s` / `stats` | | `key=value` lines |
//! | `w` / `save` | `path` | none |
//! | `x` / `quit` | | stops the loop |
//!
//! Malformed lines are reported on the diagnostic stream and skipped.

pub mod bench;

use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::str::FromStr;

use crate::dyngraph::DynamicGraph;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instruction {
    Add(u64, u64),
    Delete(u64, u64),
    Query(u64, u64),
    Neighbors(u64),
    Reverse(u64),
    Stats,
    Save(PathBuf),
    Quit,
}

impl FromStr for Instruction {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, String> {
        let mut parts = line.split_whitespace();
        let verb = parts.next().ok_or("empty instruction")?;
        let rest: Vec<&str> = parts.collect();
        let ids = |want: usize| -> Result<Vec<u64>, String> {
            if rest.len() != want {
                return Err(format!(
                    "{verb:?} expects {want} operand(s), got {}",
                    rest.len()
                ));
            }
            rest.iter()
                .map(|s| s.parse().map_err(|_| format!("invalid vertex id {s:?}")))
                .collect()
        };
        let inst = match verb {
            "a" | "add" => ids(2).map(|x| Instruction::Add(x[0], x[1]))?,
            "d" | "delete" => ids(2).map(|x| Instruction::Delete(x[0], x[1]))?,
            "q" | "query" => ids(2).map(|x| Instruction::Query(x[0], x[1]))?,
            "n" | "neighbors" => ids(1).map(|x| Instruction::Neighbors(x[0]))?,
            "r" | "reverse" => ids(1).map(|x| Instruction::Reverse(x[0]))?,
            "s" | "stats" => ids(0).map(|_| Instruction::Stats)?,
            "x" | "quit" => ids(0).map(|_| Instruction::Quit)?,
            "w" | "save" => match rest.as_slice() {
                [path] => Instruction::Save(PathBuf::from(path)),
                _ => return Err(format!("{verb:?} expects a path")),
            },
            other => return Err(format!("unknown instruction {other:?}")),
        };
        Ok(inst)
    }
}

fn write_ids<W: Write>(out: &mut W, ids: &[u64]) -> std::io::Result<()> {
    let line = ids.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    writeln!(out, "{line}")
}

/// Runs instructions from `input` until end of input or `x`.
///
/// Only I/O failures on the streams themselves are returned as errors.
pub fn run_loop<R, W, E>(
    graph: &mut DynamicGraph,
    input: R,
    out: &mut W,
    diag: &mut E,
) -> Result<()>
where
    R: BufRead,
    W: Write,
    E: Write,
{
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let inst = match trimmed.parse::<Instruction>() {
            Ok(inst) => inst,
            Err(msg) => {
                writeln!(diag, "line {}: {msg}", idx + 1)?;
                continue;
            }
        };
        match inst {
            Instruction::Add(u, v) => {
                if let Err(e) = graph.add_edge(u, v) {
                    writeln!(diag, "line {}: {e}", idx + 1)?;
                }
            }
            Instruction::Delete(u, v) => {
                graph.remove_edge(u, v);
            }
            Instruction::Query(u, v) => writeln!(out, "{}", u8::from(graph.contains(u, v)))?,
            Instruction::Neighbors(u) => write_ids(out, &graph.neighbors(u))?,
            Instruction::Reverse(v) => write_ids(out, &graph.reverse_neighbors(v))?,
            Instruction::Stats => writeln!(out, "{}", graph.stats())?,
            Instruction::Save(path) => {
                if let Err(e) = std::fs::write(&path, graph.save()) {
                    writeln!(diag, "line {}: saving {}: {e}", idx + 1, path.display())?;
                }
            }
            Instruction::Quit => break,
        }
    }
    out.flush()?;
    Ok(())
}
