//! Runtime parameters: object identifiers, the host class registry, and the
//! facts handed to the grounder.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::syntax::{requirements, ParamKind, Requirements, SpecProgram};

/// Identifier of an object the solver reasons about.
///
/// Parameter objects are numbered in declaration-then-index order. Created
/// objects are named by their constructor call, so equal calls always
/// denote the same object. The derived order is the object order `<` of the
/// language: parameter objects by number, then created objects by class name
/// and argument tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectId {
    Param(u32),
    Created { class: String, args: Vec<Value> },
}

/// A ground term value. Integers sort before symbols, symbols before objects.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Symbol(String),
    Object(ObjectId),
}

impl ObjectId {
    pub fn created(class: &str, args: Vec<Value>) -> Self {
        ObjectId::Created {
            class: class.to_string(),
            args,
        }
    }

    pub fn is_param(&self) -> bool {
        matches!(self, ObjectId::Param(_))
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectId::Param(n) => write!(f, "p{n}"),
            ObjectId::Created { class, args } => {
                write!(f, "new({class}")?;
                for a in args {
                    write!(f, ",{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Symbol(s) => f.write_str(s),
            Value::Object(o) => write!(f, "{o}"),
        }
    }
}

/// Argument passed to host constructors and methods.
#[derive(Debug, Clone)]
pub enum HostValue<O> {
    Int(i64),
    Symbol(String),
    Object(O),
}

impl<O> HostValue<O> {
    pub fn as_object(&self) -> Option<&O> {
        match self {
            HostValue::Object(o) => Some(o),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            HostValue::Int(n) => Some(*n),
            _ => None,
        }
    }
}

/// Failure reported by host code.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct HostError(pub String);

impl HostError {
    pub fn new(msg: impl Into<String>) -> Self {
        HostError(msg.into())
    }
}

pub type Constructor<O> = Box<dyn Fn(&[HostValue<O>]) -> Result<O, HostError>>;
pub type MethodInvoker<O> = Box<dyn Fn(&O, &[HostValue<O>]) -> Result<Option<i64>, HostError>>;
pub type Accessor<O> = Box<dyn Fn(&O) -> Result<i64, HostError>>;

/// Host-side table of constructors, methods and pure getters, keyed by class
/// name. Stands in for runtime reflection.
pub struct ClassRegistry<O> {
    classes: BTreeSet<String>,
    constructors: HashMap<String, Constructor<O>>,
    methods: HashMap<(String, String), MethodInvoker<O>>,
    accessors: HashMap<(String, String), Accessor<O>>,
}

impl<O> Default for ClassRegistry<O> {
    fn default() -> Self {
        ClassRegistry {
            classes: BTreeSet::new(),
            constructors: HashMap::new(),
            methods: HashMap::new(),
            accessors: HashMap::new(),
        }
    }
}

impl<O> fmt::Debug for ClassRegistry<O> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClassRegistry")
            .field("classes", &self.classes)
            .finish_non_exhaustive()
    }
}

impl<O> ClassRegistry<O> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a class without constructors or methods.
    pub fn class(&mut self, name: &str) -> &mut Self {
        self.classes.insert(name.to_string());
        self
    }

    pub fn constructor(
        &mut self,
        class: &str,
        f: impl Fn(&[HostValue<O>]) -> Result<O, HostError> + 'static,
    ) -> &mut Self {
        self.classes.insert(class.to_string());
        self.constructors.insert(class.to_string(), Box::new(f));
        self
    }

    pub fn method(
        &mut self,
        class: &str,
        method: &str,
        f: impl Fn(&O, &[HostValue<O>]) -> Result<Option<i64>, HostError> + 'static,
    ) -> &mut Self {
        self.classes.insert(class.to_string());
        self.methods
            .insert((class.to_string(), method.to_string()), Box::new(f));
        self
    }

    pub fn accessor(
        &mut self,
        class: &str,
        method: &str,
        f: impl Fn(&O) -> Result<i64, HostError> + 'static,
    ) -> &mut Self {
        self.classes.insert(class.to_string());
        self.accessors
            .insert((class.to_string(), method.to_string()), Box::new(f));
        self
    }

    pub fn knows_class(&self, class: &str) -> bool {
        self.classes.contains(class)
    }

    pub fn get_constructor(&self, class: &str) -> Option<&Constructor<O>> {
        self.constructors.get(class)
    }

    pub fn get_method(&self, class: &str, method: &str) -> Option<&MethodInvoker<O>> {
        self.methods.get(&(class.to_string(), method.to_string()))
    }

    pub fn get_accessor(&self, class: &str, method: &str) -> Option<&Accessor<O>> {
        self.accessors.get(&(class.to_string(), method.to_string()))
    }

    /// Checks that every constructor, method and accessor the specification
    /// needs is registered.
    pub fn check_covers(&self, req: &Requirements) -> Result<(), BindError> {
        for class in &req.constructors {
            if !self.constructors.contains_key(class) {
                return Err(BindError::MissingConstructor(class.clone()));
            }
        }
        for (class, method) in &req.methods {
            if self.get_method(class, method).is_none() {
                return Err(BindError::MissingMethod {
                    class: class.clone(),
                    method: method.clone(),
                });
            }
        }
        for (class, method) in &req.accessors {
            if self.get_accessor(class, method).is_none() {
                return Err(BindError::MissingAccessor {
                    class: class.clone(),
                    method: method.clone(),
                });
            }
        }
        Ok(())
    }
}

/// One actual parameter.
#[derive(Debug, Clone)]
pub enum ParamValue<O> {
    Int(i64),
    Objects(Vec<O>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindError {
    #[error("expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("parameter `{param}` expects {expected}")]
    Kind {
        param: String,
        expected: &'static str,
    },
    #[error("class `{0}` is not registered")]
    UnknownClass(String),
    #[error("no constructor registered for class `{0}`")]
    MissingConstructor(String),
    #[error("no method `{class}.{method}` registered")]
    MissingMethod { class: String, method: String },
    #[error("no accessor `{class}.{method}()` registered")]
    MissingAccessor { class: String, method: String },
    #[error("accessor `{method}()` failed on {object} ({param}[{index}]): {source}")]
    AccessorFailed {
        object: ObjectId,
        param: String,
        index: usize,
        method: String,
        source: HostError,
    },
}

/// The objects and values one evaluation reasons about.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObjectUniverse {
    /// Array parameters in declaration order.
    pub param_objects: Vec<(String, Vec<ObjectId>)>,
    pub scalar_params: BTreeMap<String, i64>,
    pub method_table: BTreeMap<(ObjectId, String), i64>,
    /// Declared class of each parameter object, indexed by its number.
    pub object_classes: Vec<String>,
}

impl ObjectUniverse {
    pub fn object_count(&self) -> usize {
        self.object_classes.len()
    }

    /// Position of a parameter object in the object order.
    pub fn order_index(&self, id: &ObjectId) -> Option<usize> {
        match id {
            ObjectId::Param(n) if (*n as usize) < self.object_classes.len() => Some(*n as usize),
            _ => None,
        }
    }

    pub fn class_of<'a>(&'a self, id: &'a ObjectId) -> Option<&'a str> {
        match id {
            ObjectId::Param(n) => self.object_classes.get(*n as usize).map(String::as_str),
            ObjectId::Created { class, .. } => Some(class),
        }
    }

    pub fn array(&self, param: &str) -> Option<&[ObjectId]> {
        self.param_objects
            .iter()
            .find(|(p, _)| p == param)
            .map(|(_, objs)| objs.as_slice())
    }

    /// The (array, index) slot a parameter object occupies.
    pub fn slot_of(&self, id: &ObjectId) -> Option<(&str, usize)> {
        self.param_objects
            .iter()
            .find_map(|(p, objs)| objs.iter().position(|o| o == id).map(|i| (p.as_str(), i)))
    }
}

/// A bound specification: the universe plus the host objects behind its
/// parameter ids (indexed by parameter object number).
#[derive(Debug, Clone)]
pub struct Binding<O> {
    pub universe: ObjectUniverse,
    pub hosts: Vec<O>,
}

/// Assigns object ids to the actual parameters and eagerly reads every
/// method value the specification mentions.
pub fn bind_params<O>(
    spec: &SpecProgram,
    args: &[ParamValue<O>],
    registry: &ClassRegistry<O>,
) -> Result<Binding<O>, BindError>
where
    O: Clone,
{
    if args.len() != spec.params.len() {
        return Err(BindError::Arity {
            expected: spec.params.len(),
            got: args.len(),
        });
    }
    let needed = requirements(spec).accessors;
    let methods = spec.method_value_names();
    let mut universe = ObjectUniverse::default();
    let mut hosts = Vec::new();

    for (decl, arg) in spec.params.iter().zip(args) {
        match (&decl.kind, arg) {
            (ParamKind::Int, ParamValue::Int(n)) => {
                universe.scalar_params.insert(decl.name.clone(), *n);
            }
            (ParamKind::ObjectArray(class), ParamValue::Objects(objs)) => {
                if !registry.knows_class(class) {
                    return Err(BindError::UnknownClass(class.clone()));
                }
                let mut ids = Vec::with_capacity(objs.len());
                for (index, obj) in objs.iter().enumerate() {
                    let id = ObjectId::Param(hosts.len() as u32);
                    for method in &methods {
                        let key = (class.clone(), method.clone());
                        let Some(accessor) = registry.get_accessor(class, method) else {
                            if needed.contains(&key) {
                                return Err(BindError::MissingAccessor {
                                    class: class.clone(),
                                    method: method.clone(),
                                });
                            }
                            continue;
                        };
                        let value = accessor(obj).map_err(|source| BindError::AccessorFailed {
                            object: id.clone(),
                            param: decl.name.clone(),
                            index,
                            method: method.clone(),
                            source,
                        })?;
                        universe
                            .method_table
                            .insert((id.clone(), method.clone()), value);
                    }
                    ids.push(id);
                    hosts.push(obj.clone());
                    universe.object_classes.push(class.clone());
                }
                universe.param_objects.push((decl.name.clone(), ids));
            }
            (ParamKind::Int, _) => {
                return Err(BindError::Kind {
                    param: decl.name.clone(),
                    expected: "an integer",
                })
            }
            (ParamKind::ObjectArray(_), _) => {
                return Err(BindError::Kind {
                    param: decl.name.clone(),
                    expected: "an object array",
                })
            }
        }
    }
    Ok(Binding { universe, hosts })
}

/// A fact derived from the actual parameters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fact {
    ParamMember {
        param: String,
        index: usize,
        object: ObjectId,
    },
    MethodVal {
        object: ObjectId,
        method: String,
        value: i64,
    },
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::ParamMember {
                param,
                index,
                object,
            } => write!(f, "param_member({param},{index},{object})."),
            Fact::MethodVal {
                object,
                method,
                value,
            } => write!(f, "method_val({object},{method},{value})."),
        }
    }
}

/// Parameter facts plus the scalar substitution environment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactBase {
    pub facts: BTreeSet<Fact>,
    pub scalars: BTreeMap<String, i64>,
}

impl FactBase {
    pub fn is_empty(&self) -> bool {
        self.facts.is_empty() && self.scalars.is_empty()
    }

    /// Objects of an array parameter with their indices, in index order.
    pub fn members<'a>(&'a self, param: &'a str) -> impl Iterator<Item = (usize, &'a ObjectId)> {
        self.facts.iter().filter_map(move |f| match f {
            Fact::ParamMember {
                param: p,
                index,
                object,
            } if p == param => Some((*index, object)),
            _ => None,
        })
    }

    pub fn method_value(&self, object: &ObjectId, method: &str) -> Option<i64> {
        self.facts.iter().find_map(|f| match f {
            Fact::MethodVal {
                object: o,
                method: m,
                value,
            } if o == object && m == method => Some(*value),
            _ => None,
        })
    }
}

impl fmt::Display for FactBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fact in &self.facts {
            writeln!(f, "{fact}")?;
        }
        for (name, value) in &self.scalars {
            writeln!(f, "% {name} = {value}")?;
        }
        Ok(())
    }
}

/// Turns a universe into membership and method-value facts.
pub fn encode_facts(universe: &ObjectUniverse) -> FactBase {
    let mut facts = BTreeSet::new();
    for (param, objs) in &universe.param_objects {
        for (index, object) in objs.iter().enumerate() {
            facts.insert(Fact::ParamMember {
                param: param.clone(),
                index,
                object: object.clone(),
            });
        }
    }
    for ((object, method), value) in &universe.method_table {
        facts.insert(Fact::MethodVal {
            object: object.clone(),
            method: method.clone(),
            value: *value,
        });
    }
    FactBase {
        facts,
        scalars: universe.scalar_params.clone(),
    }
}
