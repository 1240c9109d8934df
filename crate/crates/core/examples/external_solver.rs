//! Hand the ground program to an external solver.
//!
//! Usage: `cargo run --example external_solver -- "clingo --models=0 --opt-mode=ignore"`
//! Without a working solver command it replays a recorded transcript.

use ospec::backend::{
    emit_core_text, solve_external, CommandSolver, TranscriptSolver, DEFAULT_SOLVER_CMD,
};
use ospec::binding::ClassRegistry;
use ospec::instantiate::prepare;
use ospec::solve::{enumerate, SolveRequest};
use ospec::syntax::parse_spec;

fn main() {
    let spec = parse_spec(include_str!("../tests/golden/toy.ospec")).unwrap();
    let program = prepare(&spec, &[], &ClassRegistry::<()>::new())
        .unwrap()
        .program;
    let core = emit_core_text(&program);
    print!("{}{}", core.table(), core.text);

    let request = SolveRequest::all(&program);
    let cmd = std::env::args()
        .nth(1)
        .unwrap_or_else(|| DEFAULT_SOLVER_CMD.to_string());
    let models = match solve_external(&request, &CommandSolver::new(&cmd)) {
        Ok(m) => {
            println!("% solved by `{cmd}`");
            m
        }
        Err(e) => {
            println!("% {e}; replaying the recorded transcript");
            let replay = TranscriptSolver {
                transcript: include_str!("../tests/golden/toy.clingo").to_string(),
            };
            solve_external(&request, &replay).unwrap()
        }
    };
    for m in &models {
        println!("{}", m.display(&program));
    }
    assert_eq!(models, enumerate(&request));
}
