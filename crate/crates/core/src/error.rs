use std::fmt;

use thiserror::Error;

use crate::binding::BindError;
use crate::ground::GroundError;
use crate::instantiate::{ExecError, PlanError};
use crate::syntax::{Diagnostic, ParseError};

/// Any pipeline failure, tagged with the stage that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("validation error: {}", Diagnostics(.0))]
    Validation(Vec<Diagnostic>),
    #[error("binding error: {0}")]
    Binding(#[from] BindError),
    #[error("grounding error: {0}")]
    Grounding(#[from] GroundError),
    #[error("plan error: {0}")]
    Plan(#[from] PlanError),
    #[error("execution error: {0}")]
    Execution(#[from] ExecError),
}

impl Error {
    pub fn stage(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::Validation(_) => "validation",
            Error::Binding(_) => "binding",
            Error::Grounding(_) => "grounding",
            Error::Plan(_) => "plan",
            Error::Execution(_) => "execution",
        }
    }
}

struct Diagnostics<'a>(&'a [Diagnostic]);

impl fmt::Display for Diagnostics<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}
