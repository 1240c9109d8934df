//! Wire six components into a connected network and build the node graph.
//!
//! Usage: `cargo run --example network [nrCables] [count]`

use std::cell::RefCell;
use std::rc::Rc;

use ospec::binding::{ClassRegistry, HostError, HostValue, ParamValue};
use ospec::syntax::parse_spec;
use ospec::{evaluate, has_solution};

struct Component {
    name: &'static str,
    sockets: i64,
    kind: i64,
}

struct Node {
    component: Rc<Component>,
    nodes: Vec<Rc<RefCell<Node>>>,
}

#[derive(Clone)]
enum Obj {
    Component(Rc<Component>),
    Node(Rc<RefCell<Node>>),
}

fn registry() -> ClassRegistry<Obj> {
    let mut r = ClassRegistry::new();
    r.constructor("Node", |args| match args {
        [HostValue::Object(Obj::Component(c))] => Ok(Obj::Node(Rc::new(RefCell::new(Node {
            component: c.clone(),
            nodes: vec![],
        })))),
        _ => Err(HostError::new("Node(Component)")),
    });
    r.method("Node", "addNode", |this, args| match (this, args) {
        (Obj::Node(n), [HostValue::Object(Obj::Node(m))]) => {
            n.borrow_mut().nodes.push(m.clone());
            Ok(None)
        }
        _ => Err(HostError::new("addNode(Node)")),
    });
    r.accessor("Component", "getNrSock", |c| match c {
        Obj::Component(c) => Ok(c.sockets),
        _ => Err(HostError::new("not a component")),
    });
    r.accessor("Component", "getType", |c| match c {
        Obj::Component(c) => Ok(c.kind),
        _ => Err(HostError::new("not a component")),
    });
    r
}

fn main() {
    let mut argv = std::env::args().skip(1);
    let cables: i64 = argv.next().map_or(9, |s| s.parse().expect("nrCables"));
    let count: usize = argv.next().map_or(1, |s| s.parse().expect("count"));

    let source = include_str!("../specs/network.ospec");
    let spec = parse_spec(source).expect("spec parses");
    let comps = [
        ("c1", 3, 1),
        ("c2", 4, 2),
        ("c3", 5, 3),
        ("c4", 3, 1),
        ("c5", 4, 2),
        ("c6", 3, 3),
    ]
    .into_iter()
    .map(|(name, sockets, kind)| {
        Obj::Component(Rc::new(Component {
            name,
            sockets,
            kind,
        }))
    })
    .collect();
    let args = [ParamValue::Objects(comps), ParamValue::Int(cables)];

    let solutions = evaluate(&spec, &args, count, &registry()).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(2)
    });
    if !has_solution(&solutions) {
        println!("no network with {cables} cables");
        return;
    }
    for (i, s) in solutions.iter().enumerate() {
        let Obj::Node(root) = &s.root else {
            unreachable!()
        };
        println!("solution {} (root {})", i + 1, root.borrow().component.name);
        for node in s.created.values() {
            let Obj::Node(n) = node else { continue };
            let n = n.borrow();
            let peers: Vec<&str> = n.nodes.iter().map(|m| m.borrow().component.name).collect();
            println!(
                "  {} [{} sockets] -> {}",
                n.component.name,
                n.component.sockets,
                peers.join(", ")
            );
        }
    }
}
