//! Facts and ground rules for a small instance, as the grounder sees them.

use ospec::binding::{bind_params, encode_facts, ClassRegistry, ParamValue};
use ospec::ground::ground;
use ospec::syntax::parse_spec;

fn main() {
    let spec = parse_spec(
        "Deg(Item[] items){
            0 {link(X?,Y?) : X? < Y? : X?items(_) : Y?items(_)} 1.
            deg(X?,N?) :- N? = {link(X?,Y?) : Y?items(_)}, X?items(_).
            :- deg(X?,N?), N? > X?.cap().
        }",
    )
    .unwrap();
    let mut r = ClassRegistry::<i64>::new();
    r.accessor("Item", "cap", |c| Ok(*c));
    let binding = bind_params(&spec, &[ParamValue::Objects(vec![1, 2, 1])], &r).unwrap();
    let facts = encode_facts(&binding.universe);
    print!("{facts}");
    println!("--");
    let program = ground(&spec, &facts).unwrap();
    print!("{program}");
    println!(
        "-- {} atoms, {} rules",
        program.atom_count(),
        program.rules.len()
    );
}
