use std::rc::Rc;

use ospec::cli::{record_registry, universe_args, UniverseDocument};
use ospec::syntax::parse_spec;
use ospec::{evaluate, has_solution};

fn main() {
    let spec = parse_spec(include_str!("../specs/network.ospec")).unwrap();
    for cables in 3..=6 {
        let text = include_str!("../specs/network.json")
            .replace("\"nrCables\": 9", &format!("\"nrCables\": {cables}"));
        let doc: UniverseDocument = serde_json::from_str(&text).unwrap();
        let args = universe_args(&spec, &doc).unwrap();
        let sols = evaluate(&spec, &args, 0, &record_registry(&spec, Rc::default())).unwrap();
        println!(
            "nrCables={cables}: has_solution={} ({} networks)",
            has_solution(&sols),
            sols.len()
        );
    }
}
