//! The cable network example: live host classes and a brute-force oracle
//! that knows nothing about logic programs.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::rc::Rc;

use ospec::binding::{ClassRegistry, HostError, HostValue, ParamValue};
use ospec::syntax::{parse_spec, SpecProgram};

pub const SOCKETS: [i64; 6] = [3, 4, 5, 3, 4, 3];
pub const TYPES: [i64; 6] = [1, 2, 3, 1, 2, 3];

#[derive(Debug)]
pub struct Component {
    pub index: usize,
    pub sockets: i64,
    pub kind: i64,
}

#[derive(Debug)]
pub struct Node {
    pub component: Rc<Component>,
    pub nodes: Vec<NodeRef>,
}

pub type NodeRef = Rc<RefCell<Node>>;

#[derive(Debug, Clone)]
pub enum Host {
    Component(Rc<Component>),
    Node(NodeRef),
}

impl Host {
    pub fn node(&self) -> &NodeRef {
        match self {
            Host::Node(n) => n,
            Host::Component(c) => panic!("component {} is not a node", c.index),
        }
    }
}

pub fn spec_source(name: &str) -> String {
    let path = format!("{}/specs/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn spec(name: &str) -> SpecProgram {
    parse_spec(&spec_source(name)).unwrap()
}

pub fn registry() -> ClassRegistry<Host> {
    let mut r = ClassRegistry::new();
    r.constructor("Node", |args| match args {
        [HostValue::Object(Host::Component(c))] => Ok(Host::Node(Rc::new(RefCell::new(Node {
            component: c.clone(),
            nodes: Vec::new(),
        })))),
        _ => Err(HostError::new("Node(Component) expected")),
    });
    r.method("Node", "addNode", |target, args| match args {
        [HostValue::Object(Host::Node(other))] => {
            target.node().borrow_mut().nodes.push(other.clone());
            Ok(None)
        }
        _ => Err(HostError::new("addNode(Node) expected")),
    });
    r.accessor("Component", "getNrSock", |c| match c {
        Host::Component(c) => Ok(c.sockets),
        _ => Err(HostError::new("not a component")),
    });
    r.accessor("Component", "getType", |c| match c {
        Host::Component(c) => Ok(c.kind),
        _ => Err(HostError::new("not a component")),
    });
    r
}

pub fn components(sockets: &[i64], types: &[i64]) -> ParamValue<Host> {
    ParamValue::Objects(
        sockets
            .iter()
            .zip(types)
            .enumerate()
            .map(|(index, (&sockets, &kind))| {
                Host::Component(Rc::new(Component {
                    index,
                    sockets,
                    kind,
                }))
            })
            .collect(),
    )
}

pub fn args(cables: i64) -> Vec<ParamValue<Host>> {
    vec![components(&SOCKETS, &TYPES), ParamValue::Int(cables)]
}

/// An undirected graph as a set of `(a, b)` pairs with `a < b`.
pub type Graph = BTreeSet<(usize, usize)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Forbid {
    SameSockets,
    SameType,
}

/// Every valid wiring and the node it returns, found by trying all edge
/// subsets of the complete graph.
pub fn oracle(
    sockets: &[i64],
    types: &[i64],
    cables: usize,
    forbid: Forbid,
) -> Vec<(Graph, usize)> {
    let n = sockets.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let key = match forbid {
        Forbid::SameSockets => sockets,
        Forbid::SameType => types,
    };
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        if edges.len() > cables || edges.iter().any(|&(a, b)| key[a] == key[b]) {
            continue;
        }
        let mut degree = vec![0i64; n];
        for &(a, b) in &edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        if (0..n).any(|i| degree[i] > sockets[i]) || !connected(n, &edges) {
            continue;
        }
        let top = *degree.iter().max().unwrap();
        let root = (0..n).find(|&i| degree[i] == top).unwrap();
        out.push((edges.into_iter().collect(), root));
    }
    out
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            let w = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Reads the wiring back from live node objects. Panics if adjacency is not
/// symmetric or a node is linked twice to the same neighbour.
pub fn graph_of(nodes: &[NodeRef]) -> Graph {
    let mut directed = BTreeSet::new();
    for n in nodes {
        let n = n.borrow();
        for m in &n.nodes {
            let fresh = directed.insert((n.component.index, m.borrow().component.index));
            assert!(fresh, "duplicate addNode");
        }
    }
    for &(a, b) in &directed {
        assert!(directed.contains(&(b, a)), "edge {a}-{b} is one-way");
    }
    directed.into_iter().filter(|(a, b)| a < b).collect()
}
