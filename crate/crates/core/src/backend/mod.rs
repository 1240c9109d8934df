//! Delegating the search to an external ASP solver.
//!
//! The ground program is printed as solver text, handed to the solver, and
//! the reported answers are mapped back to atom ids. Every reported model is
//! checked against the embedded stability test before it is accepted.

mod output;
mod text;

use std::io::Write;
use std::process::{Command, Stdio};

use thiserror::Error;

pub use output::{parse_solver_output, OutputError};
pub use text::{atom_name, emit_core_text, CoreText};

use crate::ground::GroundProgram;
use crate::solve::{is_stable_model, select, AnswerSet, SolveRequest};

/// Default command for [`CommandSolver`]; asks for every model and leaves
/// optimization to the caller.
pub const DEFAULT_SOLVER_CMD: &str = "clingo --models=0 --opt-mode=ignore";

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("empty solver command")]
    EmptyCommand,
    #[error("could not run `{command}`: {source}")]
    Spawn {
        command: String,
        source: std::io::Error,
    },
    #[error("solver output: {0}")]
    Output(#[from] OutputError),
    #[error("solver reported a set that is not a stable model: {0}")]
    NotStable(String),
}

/// Something that turns solver text into solver output text.
pub trait ExternalSolver {
    fn run(&self, program: &str) -> Result<String, BackendError>;
}

/// Runs a solver process, writing the program to its standard input.
///
/// The command is split at whitespace; no shell is involved. It must print
/// all models, so pass the solver's "enumerate everything" option.
#[derive(Debug, Clone)]
pub struct CommandSolver {
    pub command: String,
}

impl CommandSolver {
    pub fn new(command: impl Into<String>) -> Self {
        CommandSolver {
            command: command.into(),
        }
    }
}

impl ExternalSolver for CommandSolver {
    fn run(&self, program: &str) -> Result<String, BackendError> {
        let mut parts = self.command.split_whitespace();
        let exe = parts.next().ok_or(BackendError::EmptyCommand)?;
        let spawn_err = |source| BackendError::Spawn {
            command: self.command.clone(),
            source,
        };
        let mut child = Command::new(exe)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(spawn_err)?;
        child
            .stdin
            .take()
            .expect("stdin is piped")
            .write_all(program.as_bytes())
            .map_err(spawn_err)?;
        // solvers signal the verdict through exit codes such as 10, 20 and
        // 30, so only the printed verdict is trusted
        let out = child.wait_with_output().map_err(spawn_err)?;
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    }
}

/// Replays a recorded solver transcript, whatever the program.
#[derive(Debug, Clone)]
pub struct TranscriptSolver {
    pub transcript: String,
}

impl ExternalSolver for TranscriptSolver {
    fn run(&self, _program: &str) -> Result<String, BackendError> {
        Ok(self.transcript.clone())
    }
}

/// Solves through an external solver. Results are ordered, optimized and
/// capped exactly as [`crate::solve::enumerate`] does.
pub fn solve_external(
    request: &SolveRequest,
    solver: &dyn ExternalSolver,
) -> Result<Vec<AnswerSet>, BackendError> {
    let program: &GroundProgram = request.program;
    let core = emit_core_text(program);
    let output = solver.run(&core.text)?;
    let mut models = Vec::new();
    for atoms in parse_solver_output(&output, &core)? {
        let answer = AnswerSet::from_atoms(program, atoms);
        if !is_stable_model(program, answer.truth()) {
            return Err(BackendError::NotStable(answer.display(program).to_string()));
        }
        models.push(answer);
    }
    let optimize = request.optimize && !program.minimize.is_empty();
    Ok(select(models, request.count, optimize))
}
