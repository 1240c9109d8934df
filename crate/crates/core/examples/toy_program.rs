//! The two-model toy program, then the same program with `:- a(o).`

use ospec::binding::ClassRegistry;
use ospec::instantiate::prepare;
use ospec::solve::{enumerate, SolveRequest};
use ospec::syntax::parse_spec;

fn show(source: &str) {
    let spec = parse_spec(source).expect("parses");
    let prepared = prepare(&spec, &[], &ClassRegistry::<()>::new()).expect("grounds");
    let program = &prepared.program;
    print!("{program}");
    for (i, model) in enumerate(&SolveRequest::all(program)).iter().enumerate() {
        println!("  answer {}: {}", i + 1, model.display(program));
    }
    println!();
}

fn main() {
    show("Toy(){ a(o) :- not b(o). b(o) :- not a(o). c(o). }");
    show("Toy(){ a(o) :- not b(o). b(o) :- not a(o). c(o). :- a(o). }");
}
