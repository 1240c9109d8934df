//! The `ospec` command: solve a specification file against a JSON universe
//! and print JSON plan documents.
//!
//! Parameter objects in the universe are plain records carrying their class
//! and precomputed method values. Constructors and methods named by the
//! specification are provided by recording stand-ins, so every plan can be
//! executed and its effects reported without any host code.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::rc::Rc;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::backend::{solve_external, CommandSolver, DEFAULT_SOLVER_CMD};
use crate::binding::{ClassRegistry, HostError, HostValue, ParamValue, Value};
use crate::instantiate::{execute_plan, extract_all, prepare, ConstructionPlan, Prepared};
use crate::solve::{enumerate, SolveRequest};
use crate::syntax::{parse_spec, requirements, ParamKind, SpecProgram};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    /// JSON plan documents.
    Plans,
    /// The ground program, one rule per line.
    Ground,
    /// Facts derived from the universe.
    Facts,
    /// Solver text with its atom table.
    Core,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Embedded,
    External,
}

#[derive(Debug, Parser)]
#[command(
    name = "ospec",
    version,
    about = "Solve an object specification against a universe"
)]
pub struct Args {
    /// Specification file (.ospec).
    pub spec: PathBuf,
    /// Universe document (JSON).
    pub universe: PathBuf,
    /// Number of solutions, 0 for all.
    #[arg(short = 'n', long = "count", default_value_t = 0)]
    pub count: usize,
    /// Keep only solutions of minimal cost.
    #[arg(long)]
    pub optimize: bool,
    #[arg(long, value_enum, default_value_t = Emit::Plans)]
    pub emit: Emit,
    #[arg(long, value_enum, default_value_t = Backend::Embedded)]
    pub backend: Backend,
    /// Solver command for the external backend; reads the program on stdin.
    #[arg(long, default_value = DEFAULT_SOLVER_CMD)]
    pub solver_cmd: String,
    /// Accepted for compatibility; output is always deterministic.
    #[arg(long)]
    pub seedless: bool,
    /// Print the search tree to stderr.
    #[arg(long)]
    pub trace: bool,
}

/// Parameter values as read from the universe document.
#[derive(Debug, Clone, Deserialize)]
pub struct UniverseDocument {
    pub params: BTreeMap<String, ParamEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ParamEntry {
    Int(i64),
    Objects(Vec<ObjectRecord>),
}

#[derive(Debug, Clone, Deserialize)]
pub struct ObjectRecord {
    pub class: String,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub methods: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueDoc {
    Int(i64),
    Symbol(String),
    Object(String),
}

impl From<&Value> for ValueDoc {
    fn from(v: &Value) -> Self {
        match v {
            Value::Int(n) => ValueDoc::Int(*n),
            Value::Symbol(s) => ValueDoc::Symbol(s.clone()),
            Value::Object(o) => ValueDoc::Object(o.to_string()),
        }
    }
}

fn values(vs: &[Value]) -> Vec<ValueDoc> {
    vs.iter().map(ValueDoc::from).collect()
}

#[derive(Debug, Serialize)]
pub struct CreationDoc {
    pub object: String,
    pub class: String,
    pub args: Vec<ValueDoc>,
}

#[derive(Debug, Serialize)]
pub struct InvocationDoc {
    pub stage: u32,
    pub target: String,
    pub method: String,
    pub args: Vec<ValueDoc>,
}

#[derive(Debug, Serialize)]
pub struct ObjectDoc {
    pub id: String,
    pub class: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub args: Vec<String>,
    pub calls: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct PlanDocument {
    pub cost: usize,
    pub creations: Vec<CreationDoc>,
    pub invocations: Vec<InvocationDoc>,
    #[serde(rename = "return")]
    pub returns: String,
    /// Objects built or called by the plan, in object order.
    pub objects: Vec<ObjectDoc>,
    /// Every constructor and method call, in execution order.
    pub effects: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct OutputDocument {
    pub status: &'static str,
    pub plans: Vec<PlanDocument>,
}

/// What a run printed and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// A recording stand-in for a host object.
#[derive(Debug)]
pub struct Record {
    pub id: String,
    pub class: String,
    pub label: Option<String>,
    pub args: Vec<String>,
    pub methods: BTreeMap<String, i64>,
    pub calls: Vec<String>,
}

pub type RecordRef = Rc<RefCell<Record>>;

fn render_host(v: &HostValue<RecordRef>) -> String {
    match v {
        HostValue::Int(n) => n.to_string(),
        HostValue::Symbol(s) => s.clone(),
        HostValue::Object(o) => o.borrow().id.clone(),
    }
}

fn render_args(args: &[HostValue<RecordRef>]) -> Vec<String> {
    args.iter().map(render_host).collect()
}

/// Builds stand-ins for every constructor, method and accessor `spec`
/// needs. Calls are appended to `effects`.
pub fn record_registry(
    spec: &SpecProgram,
    effects: Rc<RefCell<Vec<String>>>,
) -> ClassRegistry<RecordRef> {
    let req = requirements(spec);
    let mut registry = ClassRegistry::new();
    for p in &spec.params {
        if let ParamKind::ObjectArray(class) = &p.kind {
            registry.class(class);
        }
    }
    for class in &req.constructors {
        let log = effects.clone();
        let name = class.clone();
        registry.constructor(class, move |args| {
            let args = render_args(args);
            let id = if args.is_empty() {
                format!("new({name})")
            } else {
                format!("new({name},{})", args.join(","))
            };
            log.borrow_mut()
                .push(format!("{id} = new {name}({})", args.join(", ")));
            Ok(Rc::new(RefCell::new(Record {
                id,
                class: name.clone(),
                label: None,
                args,
                methods: BTreeMap::new(),
                calls: Vec::new(),
            })))
        });
    }
    for (class, method) in &req.methods {
        let log = effects.clone();
        let name = method.clone();
        registry.method(class, method, move |target, args| {
            let call = format!("{name}({})", render_args(args).join(", "));
            let mut t = target.borrow_mut();
            log.borrow_mut().push(format!("{}.{call}", t.id));
            t.calls.push(call);
            Ok(None)
        });
    }
    for (class, method) in &req.accessors {
        let name = method.clone();
        registry.accessor(class, method, move |o| {
            let o = o.borrow();
            o.methods
                .get(&name)
                .copied()
                .ok_or_else(|| HostError::new(format!("universe gives no value for {}()", name)))
        });
    }
    registry
}

/// Converts the universe document into actual parameters in declaration
/// order.
pub fn universe_args(
    spec: &SpecProgram,
    doc: &UniverseDocument,
) -> Result<Vec<ParamValue<RecordRef>>, String> {
    for name in doc.params.keys() {
        if spec.param(name).is_none() {
            return Err(format!("unknown parameter `{name}`"));
        }
    }
    let mut args = Vec::new();
    let mut next_id = 0;
    for p in &spec.params {
        let entry = doc
            .params
            .get(&p.name)
            .ok_or_else(|| format!("missing parameter `{}`", p.name))?;
        match (&p.kind, entry) {
            (ParamKind::Int, ParamEntry::Int(n)) => args.push(ParamValue::Int(*n)),
            (ParamKind::ObjectArray(class), ParamEntry::Objects(records)) => {
                let mut objs = Vec::new();
                for (i, r) in records.iter().enumerate() {
                    if &r.class != class {
                        return Err(format!(
                            "{}[{i}] has class `{}`, expected `{class}`",
                            p.name, r.class
                        ));
                    }
                    objs.push(Rc::new(RefCell::new(Record {
                        id: format!("p{next_id}"),
                        class: r.class.clone(),
                        label: r.label.clone(),
                        args: Vec::new(),
                        methods: r.methods.clone(),
                        calls: Vec::new(),
                    })));
                    next_id += 1;
                }
                args.push(ParamValue::Objects(objs));
            }
            (ParamKind::Int, _) => {
                return Err(format!("parameter `{}` must be an integer", p.name))
            }
            (ParamKind::ObjectArray(_), _) => {
                return Err(format!(
                    "parameter `{}` must be an array of objects",
                    p.name
                ))
            }
        }
    }
    Ok(args)
}

enum Failure {
    Io(String),
    Universe(String),
    Backend(String),
    Pipeline(Error),
}

impl Failure {
    fn render(&self) -> String {
        match self {
            Failure::Io(m) => format!("error[io]: {m}"),
            Failure::Universe(m) => format!("error[universe]: {m}"),
            Failure::Backend(m) => format!("error[backend]: {m}"),
            Failure::Pipeline(Error::Validation(ds)) => {
                let mut out = String::new();
                for (i, d) in ds.iter().enumerate() {
                    if i > 0 {
                        out.push('\n');
                    }
                    write!(out, "error[validation]: {d}").unwrap();
                }
                out
            }
            Failure::Pipeline(e) => format!("error[{}]: {e}", e.stage()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Pipeline(e)
    }
}

fn plan_document(
    plan: &ConstructionPlan,
    cost: usize,
    prepared: &Prepared<RecordRef>,
    registry: &ClassRegistry<RecordRef>,
    effects: &Rc<RefCell<Vec<String>>>,
) -> Result<PlanDocument, Failure> {
    // fresh parameter records per plan, so calls from one plan do not leak
    // into the next
    let hosts: Vec<RecordRef> = prepared
        .binding
        .hosts
        .iter()
        .map(|h| {
            let h = h.borrow();
            Rc::new(RefCell::new(Record {
                id: h.id.clone(),
                class: h.class.clone(),
                label: h.label.clone(),
                args: Vec::new(),
                methods: h.methods.clone(),
                calls: Vec::new(),
            }))
        })
        .collect();
    effects.borrow_mut().clear();
    let solution = execute_plan(plan, registry, &prepared.binding.universe, &hosts)
        .map_err(|e| Failure::Pipeline(Error::Execution(e)))?;
    let mut objects = Vec::new();
    for h in &hosts {
        let h = h.borrow();
        if !h.calls.is_empty() {
            objects.push(object_doc(&h));
        }
    }
    for o in solution.created.values() {
        objects.push(object_doc(&o.borrow()));
    }
    Ok(PlanDocument {
        cost,
        creations: plan
            .creations
            .iter()
            .map(|c| CreationDoc {
                object: c.object.to_string(),
                class: c.class.clone(),
                args: values(&c.args),
            })
            .collect(),
        invocations: plan
            .invocations
            .iter()
            .map(|i| InvocationDoc {
                stage: i.stage,
                target: i.target.to_string(),
                method: i.method.clone(),
                args: values(&i.args),
            })
            .collect(),
        returns: plan.returns.to_string(),
        objects,
        effects: effects.borrow().clone(),
    })
}

fn object_doc(r: &Record) -> ObjectDoc {
    ObjectDoc {
        id: r.id.clone(),
        class: r.class.clone(),
        label: r.label.clone(),
        args: r.args.clone(),
        calls: r.calls.clone(),
    }
}

fn execute(args: &Args) -> Result<(i32, String), Failure> {
    let read = |p: &PathBuf| {
        std::fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))
    };
    let spec = parse_spec(&read(&args.spec)?).map_err(Error::from)?;
    let doc: UniverseDocument = serde_json::from_str(&read(&args.universe)?)
        .map_err(|e| Failure::Universe(format!("{}: {e}", args.universe.display())))?;
    let params = universe_args(&spec, &doc).map_err(Failure::Universe)?;
    let effects = Rc::new(RefCell::new(Vec::new()));
    let registry = record_registry(&spec, effects.clone());
    let prepared = prepare(&spec, &params, &registry)?;

    match args.emit {
        Emit::Facts => return Ok((0, prepared.facts.to_string())),
        Emit::Ground => return Ok((0, prepared.program.to_string())),
        Emit::Core => {
            let core = crate::backend::emit_core_text(&prepared.program);
            return Ok((0, format!("{}{}", core.table(), core.text)));
        }
        Emit::Plans => {}
    }

    let request = SolveRequest {
        program: &prepared.program,
        count: args.count,
        optimize: args.optimize,
        trace: args.trace,
    };
    let answers = match args.backend {
        Backend::Embedded => enumerate(&request),
        Backend::External => solve_external(&request, &CommandSolver::new(&args.solver_cmd))
            .map_err(|e| Failure::Backend(e.to_string()))?,
    };
    let mut plans = Vec::new();
    for (answer, plan) in extract_all(answers, &prepared.program)? {
        plans.push(plan_document(
            &plan,
            answer.cost,
            &prepared,
            &registry,
            &effects,
        )?);
    }
    let status = if plans.is_empty() {
        "unsatisfiable"
    } else {
        "satisfiable"
    };
    let code = if plans.is_empty() { 1 } else { 0 };
    let doc = OutputDocument { status, plans };
    let mut text = serde_json::to_string_pretty(&doc).expect("documents serialize");
    text.push('\n');
    Ok((code, text))
}

/// Runs the command with the given arguments (program name first).
pub fn run<I, T>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if e.use_stderr() {
                CliOutput {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                CliOutput {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match execute(&args) {
        Ok((code, stdout)) => CliOutput {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(f) => CliOutput {
            code: 2,
            stdout: String::new(),
            stderr: f.render() + "\n",
        },
    }
}
