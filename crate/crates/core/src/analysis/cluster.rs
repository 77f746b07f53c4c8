use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::project::{Binding, Project};
use crate::lang::{FunctionDef, Item, TypeAnnotation};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassType {
    pub module: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeInfo {
    Int,
    Float,
    Str,
    Bool,
    NoneType,
    /// Homogeneous list; `None` when the element type is not known.
    List(Option<Box<TypeInfo>>),
    Class(ClassType),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    Builtin,
    ModuleUnderTest,
    Context,
}

impl TypeInfo {
    pub const BUILTINS: [TypeInfo; 6] = [
        TypeInfo::Int,
        TypeInfo::Float,
        TypeInfo::Str,
        TypeInfo::Bool,
        TypeInfo::List(None),
        TypeInfo::NoneType,
    ];

    pub fn canonical_name(&self) -> String {
        self.to_string()
    }

    pub fn origin(&self, module_under_test: &str) -> Origin {
        match self {
            TypeInfo::Class(c) if c.module == module_under_test => Origin::ModuleUnderTest,
            TypeInfo::Class(_) => Origin::Context,
            _ => Origin::Builtin,
        }
    }

    pub fn is_primitive(&self) -> bool {
        matches!(
            self,
            TypeInfo::Int | TypeInfo::Float | TypeInfo::Str | TypeInfo::Bool | TypeInfo::NoneType
        )
    }

    /// Whether a value of type `self` may be passed where `want` is expected.
    /// An unknown list element type matches any list.
    pub fn fits(&self, want: &TypeInfo) -> bool {
        match (self, want) {
            (TypeInfo::List(_), TypeInfo::List(None)) => true,
            (TypeInfo::List(Some(a)), TypeInfo::List(Some(b))) => a.fits(b),
            _ => self == want,
        }
    }
}

impl fmt::Display for TypeInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeInfo::Int => f.write_str("int"),
            TypeInfo::Float => f.write_str("float"),
            TypeInfo::Str => f.write_str("str"),
            TypeInfo::Bool => f.write_str("bool"),
            TypeInfo::NoneType => f.write_str("none"),
            TypeInfo::List(None) => f.write_str("list"),
            TypeInfo::List(Some(t)) => write!(f, "list[{t}]"),
            TypeInfo::Class(c) => write!(f, "{}.{}", c.module, c.name),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CallableKind {
    Function,
    Constructor,
    Method,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParamInfo {
    pub name: String,
    pub declared: Option<TypeInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GenericCallable {
    pub kind: CallableKind,
    /// Module the definition lives in.
    pub module: String,
    /// Class for methods and constructors.
    pub owner: Option<String>,
    /// Function or method name; the class name for constructors.
    pub name: String,
    /// Parameters without the receiver.
    pub params: Vec<ParamInfo>,
    pub returns: Option<TypeInfo>,
    /// Attribute path from the namespace of the module under test
    /// (e.g. `["Point"]` or `["geo", "Point"]`). Empty for methods.
    pub access_path: Vec<String>,
}

impl GenericCallable {
    /// `f`, `Stack` (constructor) or `Stack.push`.
    pub fn qualified_name(&self) -> String {
        match (&self.kind, &self.owner) {
            (CallableKind::Method, Some(owner)) => format!("{owner}.{}", self.name),
            _ => self.name.clone(),
        }
    }

    /// Name of the code object the call enters, matching
    /// [`crate::lang::AstModule::code_objects`].
    pub fn code_object(&self) -> String {
        match (&self.kind, &self.owner) {
            (CallableKind::Constructor, Some(owner)) => format!("{owner}.__init__"),
            _ => self.qualified_name(),
        }
    }

    pub fn owner_type(&self) -> Option<TypeInfo> {
        self.owner.as_ref().map(|o| {
            TypeInfo::Class(ClassType {
                module: self.module.clone(),
                name: o.clone(),
            })
        })
    }

    /// Static type of the value a call produces, when known.
    pub fn output_type(&self) -> Option<TypeInfo> {
        match self.kind {
            CallableKind::Constructor => self.owner_type(),
            _ => self.returns.clone(),
        }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, Default)]
pub struct TypeEntry {
    pub constructor: Option<Arc<GenericCallable>>,
    pub modifiers: Vec<Arc<GenericCallable>>,
}

/// Extension seam for external type inference. Consulted for parameters
/// without a usable annotation while annotations are enabled.
pub trait TypeInferenceProvider {
    fn infer_parameter(&self, callable: &str, param: &str) -> Option<TypeInfo>;
}

pub struct NoTypeInference;

impl TypeInferenceProvider for NoTypeInference {
    fn infer_parameter(&self, _callable: &str, _param: &str) -> Option<TypeInfo> {
        None
    }
}

#[derive(Debug, Clone)]
pub struct TestCluster {
    pub module_name: String,
    pub accessible_callables: Vec<Arc<GenericCallable>>,
    /// Builtins and every class visible from the module under test.
    pub type_registry: BTreeMap<TypeInfo, TypeEntry>,
    /// Class names in annotations that did not resolve to a constructible class.
    pub unresolved: BTreeSet<String>,
    pub use_annotations: bool,
}

impl TestCluster {
    pub fn all_types(&self) -> Vec<TypeInfo> {
        self.type_registry.keys().cloned().collect()
    }

    pub fn constructor_for(&self, t: &TypeInfo) -> Option<&Arc<GenericCallable>> {
        self.type_registry.get(t).and_then(|e| e.constructor.as_ref())
    }

    pub fn methods_of(&self, t: &TypeInfo) -> &[Arc<GenericCallable>] {
        self.type_registry.get(t).map(|e| e.modifiers.as_slice()).unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.accessible_callables.is_empty()
    }
}

pub fn build_test_cluster(project: &Project, use_annotations: bool) -> TestCluster {
    build_test_cluster_with(project, use_annotations, &NoTypeInference)
}

pub fn build_test_cluster_with(
    project: &Project,
    use_annotations: bool,
    provider: &dyn TypeInferenceProvider,
) -> TestCluster {
    let main = project.main.clone();
    let visible = visible_classes(project);
    let mut builder = Builder {
        project,
        visible: &visible,
        use_annotations,
        provider,
        unresolved: BTreeSet::new(),
    };

    let mut type_registry: BTreeMap<TypeInfo, TypeEntry> =
        TypeInfo::BUILTINS.iter().map(|t| (t.clone(), TypeEntry::default())).collect();
    for (class, path) in &visible {
        let module = &project.modules[&class.module];
        let Some(def) = module.class(&class.name) else { continue };
        let init = def.method("__init__");
        let ctor = builder.callable(CallableKind::Constructor, class, &class.name, init, path.clone());
        let modifiers = def
            .methods
            .iter()
            .filter(|m| !is_dunder(&m.name) && !m.params.is_empty())
            .map(|m| Arc::new(builder.callable(CallableKind::Method, class, &m.name, Some(m), Vec::new())))
            .collect();
        type_registry.insert(
            TypeInfo::Class(class.clone()),
            TypeEntry {
                constructor: Some(Arc::new(ctor)),
                modifiers,
            },
        );
    }

    let mut accessible_callables = Vec::new();
    for item in &project.main_module().items {
        match item {
            Item::Function(f) => {
                let c = builder.function(&main, f);
                accessible_callables.push(Arc::new(c));
            }
            Item::Class(c) => {
                let t = TypeInfo::Class(ClassType {
                    module: main.clone(),
                    name: c.name.clone(),
                });
                if let Some(entry) = type_registry.get(&t) {
                    accessible_callables.extend(entry.constructor.iter().cloned());
                    accessible_callables.extend(entry.modifiers.iter().cloned());
                }
            }
            Item::Use(_) => {}
        }
    }

    let unresolved = builder.unresolved;
    TestCluster {
        module_name: main,
        accessible_callables,
        type_registry,
        unresolved,
        use_annotations,
    }
}

/// The declared type when there is one, otherwise a uniform draw over every
/// type in the registry.
pub fn candidates_for_type<R: Rng + ?Sized>(cluster: &TestCluster, declared: Option<&TypeInfo>, rng: &mut R) -> TypeInfo {
    if let Some(t) = declared {
        return t.clone();
    }
    let n = cluster.type_registry.len();
    cluster
        .type_registry
        .keys()
        .nth(rng.gen_range(0..n))
        .cloned()
        .expect("registry always holds the builtins")
}

fn is_dunder(name: &str) -> bool {
    name.starts_with("__") && name.ends_with("__")
}

/// Classes reachable from the main namespace, with their access paths.
fn visible_classes(project: &Project) -> BTreeMap<ClassType, Vec<String>> {
    let mut out: BTreeMap<ClassType, Vec<String>> = BTreeMap::new();
    let mut queue: VecDeque<(String, Vec<String>)> = VecDeque::from([(project.main.clone(), Vec::new())]);
    let mut seen_modules = BTreeSet::new();
    while let Some((module, prefix)) = queue.pop_front() {
        if !seen_modules.insert(module.clone()) {
            continue;
        }
        let Some(ns) = project.namespace(&module) else { continue };
        for (local, binding) in ns {
            let mut path = prefix.clone();
            path.push(local.clone());
            match binding {
                Binding::Class { module, name } => {
                    let key = ClassType {
                        module: module.clone(),
                        name: name.clone(),
                    };
                    // breadth first: the first path found is the shortest
                    out.entry(key).or_insert(path);
                }
                Binding::Module(m) => queue.push_back((m.clone(), path)),
                Binding::Function { .. } => {}
            }
        }
    }
    out
}

struct Builder<'a> {
    project: &'a Project,
    visible: &'a BTreeMap<ClassType, Vec<String>>,
    use_annotations: bool,
    provider: &'a dyn TypeInferenceProvider,
    unresolved: BTreeSet<String>,
}

impl Builder<'_> {
    fn function(&mut self, module: &str, f: &FunctionDef) -> GenericCallable {
        let params = self.params(module, &f.name, &f.params);
        let returns = self.resolve_opt(module, f.return_annotation.as_ref());
        GenericCallable {
            kind: CallableKind::Function,
            module: module.to_string(),
            owner: None,
            name: f.name.clone(),
            params,
            returns,
            access_path: vec![f.name.clone()],
        }
    }

    fn callable(
        &mut self,
        kind: CallableKind,
        class: &ClassType,
        name: &str,
        def: Option<&FunctionDef>,
        access_path: Vec<String>,
    ) -> GenericCallable {
        let qualified = format!("{}.{}", class.name, name);
        let (params, returns) = match def {
            Some(def) => {
                // the first parameter is the receiver
                let params = self.params(&class.module, &qualified, def.params.get(1..).unwrap_or(&[]));
                let returns = self.resolve_opt(&class.module, def.return_annotation.as_ref());
                (params, returns)
            }
            None => (Vec::new(), None),
        };
        GenericCallable {
            kind,
            module: class.module.clone(),
            owner: Some(class.name.clone()),
            name: name.to_string(),
            params,
            returns: if kind == CallableKind::Constructor { None } else { returns },
            access_path,
        }
    }

    fn params(&mut self, module: &str, callable: &str, params: &[crate::lang::Param]) -> Vec<ParamInfo> {
        params
            .iter()
            .map(|p| {
                let mut declared = self.resolve_opt(module, p.annotation.as_ref());
                if declared.is_none() && self.use_annotations {
                    declared = self.provider.infer_parameter(callable, &p.name);
                }
                ParamInfo {
                    name: p.name.clone(),
                    declared,
                }
            })
            .collect()
    }

    fn resolve_opt(&mut self, module: &str, a: Option<&TypeAnnotation>) -> Option<TypeInfo> {
        if !self.use_annotations {
            return None;
        }
        a.and_then(|a| self.resolve(module, a))
    }

    fn resolve(&mut self, module: &str, a: &TypeAnnotation) -> Option<TypeInfo> {
        Some(match a {
            TypeAnnotation::Int => TypeInfo::Int,
            TypeAnnotation::Float => TypeInfo::Float,
            TypeAnnotation::Str => TypeInfo::Str,
            TypeAnnotation::Bool => TypeInfo::Bool,
            TypeAnnotation::None => TypeInfo::NoneType,
            TypeAnnotation::List(elem) => TypeInfo::List(elem.as_ref().and_then(|e| self.resolve(module, e)).map(Box::new)),
            TypeAnnotation::Class(name) => match self.project.lookup(module, name) {
                Some(Binding::Class { module, name }) => {
                    let c = ClassType {
                        module: module.clone(),
                        name: name.clone(),
                    };
                    if !self.visible.contains_key(&c) {
                        self.unresolved.insert(name.clone());
                        return None;
                    }
                    TypeInfo::Class(c)
                }
                _ => {
                    self.unresolved.insert(name.clone());
                    return None;
                }
            },
        })
    }
}
