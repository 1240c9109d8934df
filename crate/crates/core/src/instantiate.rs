//! From answer sets to host objects: plan extraction, plan execution and
//! the end-to-end `evaluate` entry point.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::binding::{
    bind_params, encode_facts, Binding, ClassRegistry, FactBase, HostError, HostValue, ObjectId,
    ObjectUniverse, ParamValue, Value,
};
use crate::error::Error;
use crate::ground::{ground, GroundAtom, GroundProgram};
use crate::solve::{enumerate, AnswerSet, SolveRequest};
use crate::syntax::{requirements, validate, SpecProgram};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Creation {
    pub object: ObjectId,
    pub class: String,
    pub args: Vec<Value>,
}

/// Field order gives the execution order: stage, target, method, arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Invocation {
    pub stage: u32,
    pub target: ObjectId,
    pub method: String,
    pub args: Vec<Value>,
}

impl fmt::Display for Creation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = new {}(", self.object, self.class)?;
        write_values(f, &self.args)?;
        f.write_str(")")
    }
}

impl fmt::Display for Invocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}.{}(", self.stage, self.target, self.method)?;
        write_values(f, &self.args)?;
        f.write_str(")")
    }
}

fn write_values(f: &mut fmt::Formatter<'_>, values: &[Value]) -> fmt::Result {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

/// The object-building steps encoded by one answer set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionPlan {
    pub creations: Vec<Creation>,
    pub invocations: Vec<Invocation>,
    pub returns: ObjectId,
}

impl fmt::Display for ConstructionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.creations {
            writeln!(f, "{c}")?;
        }
        for i in &self.invocations {
            writeln!(f, "{i}")?;
        }
        writeln!(f, "return {}", self.returns)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("no return derived in answer set {answer}")]
    NoReturn { answer: String },
    #[error("ambiguous return ({}) in answer set {answer}", list(.returns))]
    AmbiguousReturn {
        returns: Vec<ObjectId>,
        answer: String,
    },
    #[error("{object} is used before it is created")]
    Dangling { object: ObjectId },
}

fn list(ids: &[ObjectId]) -> String {
    ids.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn objects_in(values: &[Value]) -> impl Iterator<Item = &ObjectId> {
    values.iter().filter_map(|v| match v {
        Value::Object(o) => Some(o),
        _ => None,
    })
}

/// Reads the creations, invocations and the returned object off an answer set.
pub fn extract_plan(
    answer: &AnswerSet,
    program: &GroundProgram,
) -> Result<ConstructionPlan, PlanError> {
    let mut creations = Vec::new();
    let mut invocations = Vec::new();
    let mut returns = Vec::new();
    for id in answer.atoms() {
        match program.get(id) {
            GroundAtom::New { class, args } => creations.push(Creation {
                object: ObjectId::created(class, args.clone()),
                class: class.clone(),
                args: args.clone(),
            }),
            GroundAtom::Exe {
                stage,
                target,
                method,
                args,
            } => invocations.push(Invocation {
                stage: *stage,
                target: target.clone(),
                method: method.clone(),
                args: args.clone(),
            }),
            GroundAtom::Return(o) => returns.push(o.clone()),
            _ => {}
        }
    }
    creations.sort();
    invocations.sort();
    let returns = match returns.len() {
        0 => {
            return Err(PlanError::NoReturn {
                answer: answer.display(program).to_string(),
            })
        }
        1 => returns.pop().unwrap(),
        _ => {
            returns.sort();
            return Err(PlanError::AmbiguousReturn {
                returns,
                answer: answer.display(program).to_string(),
            });
        }
    };

    let mut known: Vec<&ObjectId> = Vec::new();
    let check = |o: &ObjectId, known: &[&ObjectId]| {
        if o.is_param() || known.contains(&o) {
            Ok(())
        } else {
            Err(PlanError::Dangling { object: o.clone() })
        }
    };
    for c in &creations {
        for o in objects_in(&c.args) {
            check(o, &known)?;
        }
        known.push(&c.object);
    }
    for i in &invocations {
        check(&i.target, &known)?;
        for o in objects_in(&i.args) {
            check(o, &known)?;
        }
    }
    check(&returns, &known)?;
    Ok(ConstructionPlan {
        creations,
        invocations,
        returns,
    })
}

/// Position of a plan step, for error reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanStep {
    Creation(usize),
    Invocation(usize),
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanStep::Creation(i) => write!(f, "creation #{i}"),
            PlanStep::Invocation(i) => write!(f, "invocation #{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("{step}: no constructor registered for `{class}`")]
    MissingConstructor { step: PlanStep, class: String },
    #[error("{step}: no method `{class}.{method}` registered")]
    MissingMethod {
        step: PlanStep,
        class: String,
        method: String,
    },
    #[error("{step}: object {object} is unknown")]
    UnknownObject { step: PlanStep, object: ObjectId },
    #[error("{step} failed: {source}")]
    Host { step: PlanStep, source: HostError },
}

/// A materialized answer: the plan and the host object it returned.
#[derive(Debug, Clone)]
pub struct Solution<O> {
    pub plan: ConstructionPlan,
    pub root: O,
    /// Host objects created by the plan, by id.
    pub created: BTreeMap<ObjectId, O>,
}

/// Runs a plan: every constructor in order, then every invocation in order.
pub fn execute_plan<O: Clone>(
    plan: &ConstructionPlan,
    registry: &ClassRegistry<O>,
    universe: &ObjectUniverse,
    hosts: &[O],
) -> Result<Solution<O>, ExecError> {
    let mut created: BTreeMap<ObjectId, O> = BTreeMap::new();
    let resolve = |o: &ObjectId, created: &BTreeMap<ObjectId, O>, step| {
        match o {
            ObjectId::Param(n) => hosts.get(*n as usize).cloned(),
            other => created.get(other).cloned(),
        }
        .ok_or(ExecError::UnknownObject {
            step,
            object: o.clone(),
        })
    };
    let host_args = |args: &[Value], created: &BTreeMap<ObjectId, O>, step| {
        args.iter()
            .map(|v| {
                Ok(match v {
                    Value::Int(n) => HostValue::Int(*n),
                    Value::Symbol(s) => HostValue::Symbol(s.clone()),
                    Value::Object(o) => HostValue::Object(resolve(o, created, step)?),
                })
            })
            .collect::<Result<Vec<_>, ExecError>>()
    };

    for (i, c) in plan.creations.iter().enumerate() {
        let step = PlanStep::Creation(i);
        let ctor =
            registry
                .get_constructor(&c.class)
                .ok_or_else(|| ExecError::MissingConstructor {
                    step,
                    class: c.class.clone(),
                })?;
        let args = host_args(&c.args, &created, step)?;
        let obj = ctor(&args).map_err(|source| ExecError::Host { step, source })?;
        created.insert(c.object.clone(), obj);
    }
    for (i, inv) in plan.invocations.iter().enumerate() {
        let step = PlanStep::Invocation(i);
        let target = resolve(&inv.target, &created, step)?;
        let class = universe
            .class_of(&inv.target)
            .ok_or_else(|| ExecError::UnknownObject {
                step,
                object: inv.target.clone(),
            })?;
        let method =
            registry
                .get_method(class, &inv.method)
                .ok_or_else(|| ExecError::MissingMethod {
                    step,
                    class: class.to_string(),
                    method: inv.method.clone(),
                })?;
        let args = host_args(&inv.args, &created, step)?;
        method(&target, &args).map_err(|source| ExecError::Host { step, source })?;
    }
    let root = resolve(
        &plan.returns,
        &created,
        PlanStep::Invocation(plan.invocations.len()),
    )?;
    Ok(Solution {
        plan: plan.clone(),
        root,
        created,
    })
}

/// How many solutions to compute and whether to optimize.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalOptions {
    /// 0 asks for all solutions.
    pub count: usize,
    /// `None` optimizes exactly when the specification has a `#minimize`.
    pub optimize: Option<bool>,
}

/// A specification bound to its parameters and grounded.
#[derive(Debug, Clone)]
pub struct Prepared<O> {
    pub binding: Binding<O>,
    pub facts: FactBase,
    pub program: GroundProgram,
}

/// Validates, binds and grounds.
pub fn prepare<O: Clone>(
    spec: &SpecProgram,
    args: &[ParamValue<O>],
    registry: &ClassRegistry<O>,
) -> Result<Prepared<O>, Error> {
    let diagnostics = validate(spec);
    if !diagnostics.is_empty() {
        return Err(Error::Validation(diagnostics));
    }
    registry.check_covers(&requirements(spec))?;
    let binding = bind_params(spec, args, registry)?;
    let facts = encode_facts(&binding.universe);
    let program = ground(spec, &facts)?;
    Ok(Prepared {
        binding,
        facts,
        program,
    })
}

/// Solves a grounded specification and extracts one plan per answer set.
pub fn plans(
    spec: &SpecProgram,
    program: &GroundProgram,
    options: &EvalOptions,
) -> Result<Vec<(AnswerSet, ConstructionPlan)>, Error> {
    let request = SolveRequest {
        program,
        count: options.count,
        optimize: options.optimize.unwrap_or(spec.minimize.is_some()),
        trace: false,
    };
    extract_all(enumerate(&request), program)
}

/// Pairs each answer set with its plan.
pub fn extract_all(
    answers: Vec<AnswerSet>,
    program: &GroundProgram,
) -> Result<Vec<(AnswerSet, ConstructionPlan)>, Error> {
    answers
        .into_iter()
        .map(|answer| {
            let plan = extract_plan(&answer, program)?;
            Ok((answer, plan))
        })
        .collect()
}

/// Runs the whole pipeline and returns up to `count` solutions (all when
/// `count` is 0). An unsatisfiable specification gives an empty list.
pub fn evaluate<O: Clone>(
    spec: &SpecProgram,
    args: &[ParamValue<O>],
    count: usize,
    registry: &ClassRegistry<O>,
) -> Result<Vec<Solution<O>>, Error> {
    evaluate_with(
        spec,
        args,
        registry,
        &EvalOptions {
            count,
            optimize: None,
        },
    )
}

pub fn evaluate_with<O: Clone>(
    spec: &SpecProgram,
    args: &[ParamValue<O>],
    registry: &ClassRegistry<O>,
    options: &EvalOptions,
) -> Result<Vec<Solution<O>>, Error> {
    let prepared = prepare(spec, args, registry)?;
    let mut out = Vec::new();
    for (_, plan) in plans(spec, &prepared.program, options)? {
        let universe = &prepared.binding.universe;
        out.push(execute_plan(
            &plan,
            registry,
            universe,
            &prepared.binding.hosts,
        )?);
    }
    Ok(out)
}

pub fn has_solution<O>(solutions: &[Solution<O>]) -> bool {
    !solutions.is_empty()
}
