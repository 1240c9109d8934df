//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::rc::Rc;
use std::time::{Duration, Instant};

use common::network::{self, Forbid, Graph};
use ospec::backend::{emit_core_text, solve_external, TranscriptSolver};
use ospec::binding::{ClassRegistry, HostValue, ObjectId, ParamValue, Value};
use ospec::cli::{record_registry, universe_args, UniverseDocument};
use ospec::ground::{CardLiteral, GroundAtom, GroundCardinality, GroundProgram};
use ospec::instantiate::{execute_plan, plans, prepare, EvalOptions};
use ospec::solve::{brute_force_models, enumerate, evaluate_cardinality, SolveRequest};
use ospec::syntax::parse_spec;
use ospec::{evaluate, evaluate_with, has_solution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, took: Duration) -> Result<(), String> {
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))
}

fn ground_only(source: &str) -> GroundProgram {
    let spec = parse_spec(source).unwrap();
    prepare(&spec, &[], &ClassRegistry::<()>::new())
        .unwrap()
        .program
}

fn model_strings(program: &GroundProgram, request: &SolveRequest) -> BTreeSet<BTreeSet<String>> {
    enumerate(request)
        .iter()
        .map(|m| m.atoms().map(|a| program.get(a).to_string()).collect())
        .collect()
}

fn set_of(atoms: &[&[&str]]) -> BTreeSet<BTreeSet<String>> {
    atoms
        .iter()
        .map(|m| m.iter().map(|s| s.to_string()).collect())
        .collect()
}

fn toy_program() -> Outcome {
    let start = Instant::now();
    let toy = "Toy(){ a(o) :- not b(o). b(o) :- not a(o). c(o). }";
    let p = ground_only(toy);
    let got = model_strings(&p, &SolveRequest::all(&p));
    let want = set_of(&[&["a(o)", "c(o)"], &["b(o)", "c(o)"]]);
    ensure(got == want, || format!("got {got:?}"))?;
    let p = ground_only("Toy(){ a(o) :- not b(o). b(o) :- not a(o). c(o). :- a(o). }");
    let got = model_strings(&p, &SolveRequest::all(&p));
    ensure(got == set_of(&[&["b(o)", "c(o)"]]), || {
        format!("with constraint got {got:?}")
    })?;
    within(Duration::from_secs(1), start.elapsed())?;
    Ok(format!(
        "2 answer sets, then 1 with the constraint ({:.2?})",
        start.elapsed()
    ))
}

fn cardinality_semantics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let atoms = 8;
        let truth: Vec<bool> = (0..atoms).map(|_| rng.gen_bool(0.5)).collect();
        let literals: Vec<CardLiteral> = (0..5)
            .map(|_| CardLiteral {
                atom: rng.gen_range(0..atoms),
                guards: (0..rng.gen_range(0..=1))
                    .map(|_| rng.gen_range(0..atoms))
                    .collect(),
            })
            .collect();
        let direct = literals
            .iter()
            .filter(|l| truth[l.atom] && l.guards.iter().all(|&g| truth[g]))
            .count();
        let card = GroundCardinality {
            lower: Some(2),
            upper: Some(4),
            literals,
        };
        if evaluate_cardinality(&card, &truth) != (2..=4).contains(&direct) {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} discrepancies"))?;
    Ok("1000 assignments, 0 discrepancies".into())
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut models, mut unsat) = (0, 0);
    for i in 0..600 {
        let p = common::random_program(&mut rng, 8, 12);
        let fast: BTreeSet<_> = enumerate(&SolveRequest::all(&p)).into_iter().collect();
        let slow: BTreeSet<_> = brute_force_models(&p).unwrap().into_iter().collect();
        ensure(fast == slow, || format!("program #{i} differs:\n{p}"))?;
        models += slow.len();
        unsat += slow.is_empty() as usize;
    }
    within(Duration::from_secs(60), start.elapsed())?;
    Ok(format!(
        "600 programs, {models} models, {unsat} unsatisfiable, 0 discrepancies ({:.2?})",
        start.elapsed()
    ))
}

/// Runs the network spec and checks it against the oracle, returning the
/// number of solutions.
fn network_bijection(file: &str, forbid: Forbid) -> Result<usize, String> {
    let spec = network::spec(file);
    let sols =
        evaluate(&spec, &network::args(9), 0, &network::registry()).map_err(|e| e.to_string())?;
    let expected: BTreeMap<Graph, usize> =
        network::oracle(&network::SOCKETS, &network::TYPES, 9, forbid)
            .into_iter()
            .collect();
    let mut seen = BTreeSet::new();
    for s in &sols {
        let nodes: Vec<_> = s.created.values().map(|h| h.node().clone()).collect();
        ensure(nodes.len() == 6, || {
            format!("{} nodes created", nodes.len())
        })?;
        let g = network::graph_of(&nodes);
        ensure(s.plan.invocations.len() == 2 * g.len(), || {
            "addNode count".into()
        })?;
        let root = s.root.node().borrow().component.index;
        match expected.get(&g) {
            None => return Err(format!("{file}: graph {g:?} is not valid")),
            Some(&r) if r != root => {
                return Err(format!(
                    "{file}: graph {g:?} returns c{root}, oracle says c{r}"
                ))
            }
            Some(_) => {}
        }
        ensure(seen.insert(g.clone()), || {
            format!("{file}: graph {g:?} twice")
        })?;
    }
    ensure(seen.len() == expected.len(), || {
        format!(
            "{file}: {} solutions, oracle has {}",
            seen.len(),
            expected.len()
        )
    })?;
    Ok(sols.len())
}

fn network_end_to_end() -> Outcome {
    let start = Instant::now();
    let by_sockets = network_bijection("network.ospec", Forbid::SameSockets)?;
    let by_type = network_bijection("network_by_type.ospec", Forbid::SameType)?;
    within(Duration::from_secs(30), start.elapsed())?;
    Ok(format!(
        "{by_sockets} graphs (socket rule), {by_type} graphs (type rule), all matching ({:.2?})",
        start.elapsed()
    ))
}

fn minimize() -> Outcome {
    let spec = network::spec("network_min.ospec");
    let sols = evaluate_with(
        &spec,
        &network::args(9),
        &network::registry(),
        &EvalOptions {
            count: 0,
            optimize: Some(true),
        },
    )
    .map_err(|e| e.to_string())?;
    let all = network::oracle(&network::SOCKETS, &network::TYPES, 9, Forbid::SameSockets);
    let least = all.iter().map(|(g, _)| g.len()).min().unwrap();
    let want: BTreeSet<Graph> = all
        .into_iter()
        .filter(|(g, _)| g.len() == least)
        .map(|(g, _)| g)
        .collect();
    let mut got = BTreeSet::new();
    for s in &sols {
        let nodes: Vec<_> = s.created.values().map(|h| h.node().clone()).collect();
        let g = network::graph_of(&nodes);
        ensure(g.len() == least, || {
            format!("plan with {} edges, minimum is {least}", g.len())
        })?;
        // one addNode per directed edge atom
        ensure(s.plan.invocations.len() == 2 * least, || {
            format!(
                "{} addNode calls for {least} edges",
                s.plan.invocations.len()
            )
        })?;
        got.insert(g);
    }
    ensure(got == want, || {
        format!("{} minimal graphs, oracle has {}", got.len(), want.len())
    })?;
    Ok(format!(
        "{} plans, all with {least} edges, every minimal graph present",
        sols.len()
    ))
}

fn unsatisfiable() -> Outcome {
    let spec = network::spec("network.ospec");
    let sols =
        evaluate(&spec, &network::args(4), 0, &network::registry()).map_err(|e| e.to_string())?;
    ensure(sols.is_empty() && !has_solution(&sols), || {
        format!("{} solutions", sols.len())
    })?;
    ensure(
        network::oracle(&network::SOCKETS, &network::TYPES, 4, Forbid::SameSockets).is_empty(),
        || "oracle finds graphs with 4 cables".into(),
    )?;
    Ok("nrCables = 4: no solutions, has_solution = false".into())
}

fn random_staged_spec(rng: &mut impl Rng) -> (String, usize) {
    let items = rng.gen_range(1..=4);
    let mut rules = vec![
        "0 {boxed(I?) : I?items(_)} 1.".to_string(),
        "new Box(I?) :- boxed(I?).".to_string(),
        "return I? :- I?items(0).".to_string(),
    ];
    if rng.gen_bool(0.5) {
        rules.push("new Tag(I?, 1) :- I?items(_), not boxed(I?).".into());
    }
    for _ in 0..rng.gen_range(1..=4) {
        let stage = rng.gen_range(0..3);
        let method = ["open", "fill", "close"][rng.gen_range(0..3)];
        let arg = if rng.gen_bool(0.5) {
            "I?".to_string()
        } else {
            rng.gen_range(0..5).to_string()
        };
        let rule = match rng.gen_range(0..3) {
            0 => format!("exe[{stage}] B?.{method}({arg}) :- B?Box(I?)."),
            1 => format!("exe[{stage}] I?.{method}({arg}) :- I?items(_), not boxed(I?)."),
            _ => format!("exe[{stage}] I?.{method}() :- I?items(_)."),
        };
        rules.push(rule);
    }
    (
        format!("Staged(Item[] items){{\n    {}\n}}\n", rules.join("\n    ")),
        items,
    )
}

fn recording(log: &Rc<RefCell<Vec<String>>>) -> ClassRegistry<String> {
    let show = |args: &[HostValue<String>]| -> String {
        args.iter()
            .map(|a| match a {
                HostValue::Int(n) => n.to_string(),
                HostValue::Symbol(s) => s.clone(),
                HostValue::Object(o) => o.clone(),
            })
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut r = ClassRegistry::new();
    for class in ["Box", "Tag"] {
        let l = log.clone();
        r.constructor(class, move |args| {
            let id = format!("{class}<{}>", show(args));
            l.borrow_mut().push(format!("new {id}"));
            Ok(id)
        });
    }
    for class in ["Box", "Item"] {
        for method in ["open", "fill", "close"] {
            let l = log.clone();
            r.method(class, method, move |target, args| {
                l.borrow_mut()
                    .push(format!("{target}.{method}({})", show(args)));
                Ok(None)
            });
        }
    }
    r.class("Item");
    r
}

fn host_name(id: &ObjectId, hosts: &BTreeMap<ObjectId, String>) -> String {
    hosts[id].clone()
}

fn value_name(v: &Value, hosts: &BTreeMap<ObjectId, String>) -> String {
    match v {
        Value::Int(n) => n.to_string(),
        Value::Symbol(s) => s.clone(),
        Value::Object(o) => host_name(o, hosts),
    }
}

fn execution_faithfulness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut checked, mut calls, mut staged) = (0, 0, 0);
    while checked < 100 {
        let (source, items) = random_staged_spec(&mut rng);
        let spec = parse_spec(&source).map_err(|e| format!("{e}\n{source}"))?;
        let log = Rc::new(RefCell::new(Vec::new()));
        let registry = recording(&log);
        let hosts: Vec<String> = (0..items).map(|i| format!("item{i}")).collect();
        let args = [ParamValue::Objects(hosts.clone())];
        let prepared = prepare(&spec, &args, &registry).map_err(|e| format!("{e}\n{source}"))?;
        let found =
            plans(&spec, &prepared.program, &EvalOptions::default()).map_err(|e| e.to_string())?;
        let (answer, plan) = &found[rng.gen_range(0..found.len())];
        log.borrow_mut().clear();
        let solution = execute_plan(
            plan,
            &registry,
            &prepared.binding.universe,
            &prepared.binding.hosts,
        )
        .map_err(|e| e.to_string())?;

        // the log written by the doubles, predicted from the plan alone
        let mut names: BTreeMap<ObjectId, String> = (0..items)
            .map(|i| (ObjectId::Param(i as u32), hosts[i].clone()))
            .collect();
        let mut expected = Vec::new();
        for c in &plan.creations {
            let args: Vec<String> = c.args.iter().map(|v| value_name(v, &names)).collect();
            let id = format!("{}<{}>", c.class, args.join(","));
            expected.push(format!("new {id}"));
            names.insert(c.object.clone(), id);
        }
        for i in &plan.invocations {
            let args: Vec<String> = i.args.iter().map(|v| value_name(v, &names)).collect();
            expected.push(format!(
                "{}.{}({})",
                host_name(&i.target, &names),
                i.method,
                args.join(",")
            ));
        }
        let got = log.borrow().clone();
        ensure(got == expected, || {
            format!("log {got:?}\nplan {expected:?}\n{source}")
        })?;

        // the plan holds exactly the true creation and call atoms
        let true_exe = answer
            .atoms()
            .filter(|&a| matches!(prepared.program.get(a), GroundAtom::Exe { .. }))
            .count();
        let true_new = answer
            .atoms()
            .filter(|&a| matches!(prepared.program.get(a), GroundAtom::New { .. }))
            .count();
        ensure(
            true_exe == plan.invocations.len() && true_new == plan.creations.len(),
            || format!("plan size differs from answer set\n{source}"),
        )?;
        let stages: Vec<u32> = plan.invocations.iter().map(|i| i.stage).collect();
        ensure(stages.windows(2).all(|w| w[0] <= w[1]), || {
            format!("stages out of order: {stages:?}")
        })?;
        ensure(solution.root == "item0", || {
            format!("root {}", solution.root)
        })?;
        staged += (stages.first() != stages.last()) as usize;
        calls += got.len();
        checked += 1;
    }
    Ok(format!(
        "{checked} plans, {calls} logged calls, {staged} with several stages, 0 violations"
    ))
}

fn cli_determinism() -> Outcome {
    let specs = format!("{}/specs", env!("CARGO_MANIFEST_DIR"));
    let runs: [&[&str]; 4] = [
        &["network.ospec", "network.json"],
        &["network_min.ospec", "network.json", "--optimize"],
        &["network.ospec", "network.json", "-n", "1"],
        &["network.ospec", "network.json", "--emit", "ground"],
    ];
    let mut bytes = 0;
    for run in runs {
        let go = || {
            let mut cmd = Command::new(env!("CARGO_BIN_EXE_ospec"));
            cmd.arg(format!("{specs}/{}", run[0]))
                .arg(format!("{specs}/{}", run[1]))
                .args(&run[2..]);
            cmd.output().expect("binary runs")
        };
        let (a, b) = (go(), go());
        ensure(a.status.code() == Some(0), || {
            format!("{run:?} exited {:?}", a.status)
        })?;
        ensure(a.stdout == b.stdout && a.status == b.status, || {
            format!("{run:?} differs between runs")
        })?;
        bytes += a.stdout.len();
    }
    Ok(format!(
        "4 invocation pairs byte-identical ({bytes} bytes each round)"
    ))
}

fn backend_equivalence() -> Outcome {
    let dir = format!("{}/tests/golden", env!("CARGO_MANIFEST_DIR"));
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "ospec")
                .then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    let mut models = 0;
    for name in &names {
        let read = |ext: &str| std::fs::read_to_string(format!("{dir}/{name}.{ext}")).unwrap();
        let spec = parse_spec(&read("ospec")).map_err(|e| format!("{name}: {e}"))?;
        let doc: UniverseDocument = serde_json::from_str(&read("json")).unwrap();
        let args = universe_args(&spec, &doc)?;
        let registry = record_registry(&spec, Rc::default());
        let prepared = prepare(&spec, &args, &registry).map_err(|e| format!("{name}: {e}"))?;
        let program = &prepared.program;
        ensure(emit_core_text(program).text == read("lp"), || {
            format!("{name}: solver text changed")
        })?;
        let solver = TranscriptSolver {
            transcript: read("clingo"),
        };
        for optimize in [false, true] {
            let request = SolveRequest {
                program,
                count: 0,
                optimize,
                trace: false,
            };
            let embedded = enumerate(&request);
            let external = solve_external(&request, &solver).map_err(|e| format!("{name}: {e}"))?;
            ensure(embedded == external, || {
                format!(
                    "{name}: {} embedded vs {} external models",
                    embedded.len(),
                    external.len()
                )
            })?;
            models += embedded.len();
        }
    }
    Ok(format!(
        "{} golden programs, {models} models compared",
        names.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("toy program", toy_program),
        ("cardinality semantics", cardinality_semantics),
        ("oracle equivalence", oracle_equivalence),
        ("network end to end", network_end_to_end),
        ("minimize", minimize),
        ("unsatisfiable detection", unsatisfiable),
        ("execution faithfulness", execution_faithfulness),
        ("cli determinism", cli_determinism),
        ("backend equivalence", backend_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
