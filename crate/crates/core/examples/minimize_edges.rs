//! `#minimize` over edges: only spanning trees survive.

use std::rc::Rc;

use ospec::cli::{record_registry, universe_args, UniverseDocument};
use ospec::instantiate::{plans, prepare, EvalOptions};
use ospec::syntax::parse_spec;

fn main() {
    let spec = parse_spec(include_str!("../specs/network_min.ospec")).unwrap();
    let doc: UniverseDocument =
        serde_json::from_str(include_str!("../specs/network.json")).unwrap();
    let args = universe_args(&spec, &doc).unwrap();
    let prepared = prepare(&spec, &args, &record_registry(&spec, Rc::default())).unwrap();

    for optimize in [false, true] {
        let found = plans(
            &spec,
            &prepared.program,
            &EvalOptions {
                count: 0,
                optimize: Some(optimize),
            },
        )
        .unwrap();
        let costs: Vec<usize> = found.iter().map(|(a, _)| a.cost).collect();
        println!(
            "optimize={optimize}: {} plans, edge atoms from {} to {}",
            found.len(),
            costs.iter().min().unwrap(),
            costs.iter().max().unwrap()
        );
    }
    let best = plans(
        &spec,
        &prepared.program,
        &EvalOptions {
            count: 1,
            optimize: Some(true),
        },
    )
    .unwrap();
    print!("{}", best[0].1);
}
