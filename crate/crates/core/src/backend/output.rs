//! Reading the text a conventional ASP solver prints.

use thiserror::Error;

use super::text::CoreText;
use crate::ground::AtomId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OutputError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("solver reported unknown atom `{0}`")]
    UnknownAtom(String),
}

/// Splits an answer line at top-level whitespace, keeping quoted strings
/// and parenthesized arguments intact.
fn split_atoms(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let (mut depth, mut in_str, mut escaped) = (0i32, false, false);
    for c in line.chars() {
        if in_str {
            cur.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_str = false;
            }
            continue;
        }
        match c {
            '"' => {
                in_str = true;
                cur.push(c);
            }
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth -= 1;
                cur.push(c);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Parses solver output into one atom set per `Answer:` block, in order.
///
/// Lines other than answer blocks and the verdict are ignored. An
/// `UNSATISFIABLE` verdict yields an empty list.
pub fn parse_solver_output(text: &str, names: &CoreText) -> Result<Vec<Vec<AtomId>>, OutputError> {
    let mut answers = Vec::new();
    let mut verdict = None;
    let mut lines = text.lines().enumerate();
    while let Some((i, line)) = lines.next() {
        let line = line.trim_end();
        if let Some(rest) = line.strip_prefix("Answer:") {
            let numbered = rest
                .split_whitespace()
                .next()
                .is_some_and(|n| n.parse::<usize>().is_ok());
            if !numbered {
                return Err(OutputError::Malformed {
                    line: i + 1,
                    message: "answer header without a number".into(),
                });
            }
            let Some((_, atoms)) = lines.next() else {
                return Err(OutputError::Malformed {
                    line: i + 1,
                    message: "answer header without an atom line".into(),
                });
            };
            let mut set = Vec::new();
            for name in split_atoms(atoms) {
                set.push(
                    names
                        .lookup(&name)
                        .ok_or_else(|| OutputError::UnknownAtom(name.clone()))?,
                );
            }
            set.sort_unstable();
            set.dedup();
            answers.push(set);
        } else if matches!(
            line,
            "SATISFIABLE" | "UNSATISFIABLE" | "OPTIMUM FOUND" | "UNKNOWN"
        ) {
            if verdict.is_some() {
                return Err(OutputError::Malformed {
                    line: i + 1,
                    message: "second verdict".into(),
                });
            }
            verdict = Some(line);
        }
    }
    match verdict {
        None => Err(OutputError::Malformed {
            line: text.lines().count(),
            message: "no satisfiability verdict".into(),
        }),
        Some("UNSATISFIABLE") if !answers.is_empty() => Err(OutputError::Malformed {
            line: text.lines().count(),
            message: "answers reported for an unsatisfiable program".into(),
        }),
        Some("UNSATISFIABLE") => Ok(Vec::new()),
        Some(_) => Ok(answers),
    }
}
