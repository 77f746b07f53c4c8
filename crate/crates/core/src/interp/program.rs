use std::collections::HashMap;
use std::sync::Arc;

use crate::analysis::{Binding, Project};
use crate::lang::{AstModule, FunctionDef, Item};

/// A function or method: index into a module's code objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FuncId {
    pub module: usize,
    pub func: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClassId {
    pub module: usize,
    pub class: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Global {
    Function(FuncId),
    Class(ClassId),
    Module(usize),
}

#[derive(Debug)]
pub(crate) struct FuncInfo {
    pub qualname: String,
    item: usize,
    method: Option<usize>,
}

#[derive(Debug)]
pub(crate) struct ClassInfo {
    pub name: Arc<str>,
    pub methods: HashMap<String, usize>,
}

#[derive(Debug)]
pub(crate) struct ModuleInfo {
    pub name: String,
    pub ast: Arc<AstModule>,
    pub globals: HashMap<String, Global>,
    pub funcs: Vec<FuncInfo>,
    pub classes: Vec<ClassInfo>,
}

/// Loaded modules ready for execution. One module may be traced: only its
/// code records lines, branches and entered callables.
#[derive(Debug)]
pub struct Program {
    pub(crate) modules: Vec<ModuleInfo>,
    index: HashMap<String, usize>,
    pub(crate) traced: Option<usize>,
}

impl Program {
    /// Every module of the project, tracing the main one.
    pub fn new(project: &Project) -> Program {
        let main = project.main.clone();
        Program::with_traced(project, Some(&main))
    }

    pub fn with_traced(project: &Project, traced: Option<&str>) -> Program {
        Program::with_overrides(project, traced, &HashMap::new())
    }

    /// Like [`Program::with_traced`] but with some module bodies replaced,
    /// e.g. by a mutant of the module under test.
    pub fn with_overrides(project: &Project, traced: Option<&str>, overrides: &HashMap<String, Arc<AstModule>>) -> Program {
        let index: HashMap<String, usize> = project.modules.keys().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let mut modules: Vec<ModuleInfo> = project
            .modules
            .iter()
            .map(|(name, ast)| code_objects(name, overrides.get(name).unwrap_or(ast).clone()))
            .collect();
        let globals: Vec<HashMap<String, Global>> = modules
            .iter()
            .map(|m| {
                let ns = project.namespace(&m.name).cloned().unwrap_or_default();
                ns.into_iter()
                    .filter_map(|(local, binding)| {
                        let g = match binding {
                            Binding::Function { module, name } => {
                                let mi = index[&module];
                                let func = modules[mi].funcs.iter().position(|f| f.method.is_none() && f.qualname == name)?;
                                Global::Function(FuncId { module: mi, func })
                            }
                            Binding::Class { module, name } => {
                                let mi = index[&module];
                                let class = modules[mi].classes.iter().position(|c| *c.name == *name)?;
                                Global::Class(ClassId { module: mi, class })
                            }
                            Binding::Module(name) => Global::Module(index[&name]),
                        };
                        Some((local, g))
                    })
                    .collect()
            })
            .collect();
        for (m, g) in modules.iter_mut().zip(globals) {
            m.globals = g;
        }
        let traced = traced.and_then(|t| index.get(t).copied());
        Program { modules, index, traced }
    }

    pub fn module_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn traced_module(&self) -> Option<&Arc<AstModule>> {
        self.traced.map(|i| &self.modules[i].ast)
    }

    pub(crate) fn def(&self, id: FuncId) -> &FunctionDef {
        let m = &self.modules[id.module];
        let f = &m.funcs[id.func];
        match (&m.ast.items[f.item], f.method) {
            (Item::Function(def), None) => def,
            (Item::Class(c), Some(i)) => &c.methods[i],
            _ => unreachable!("code object table out of sync"),
        }
    }

    pub(crate) fn qualname(&self, id: FuncId) -> &str {
        &self.modules[id.module].funcs[id.func].qualname
    }

    pub(crate) fn class(&self, id: ClassId) -> &ClassInfo {
        &self.modules[id.module].classes[id.class]
    }

    pub(crate) fn global(&self, module: usize, name: &str) -> Option<Global> {
        self.modules[module].globals.get(name).copied()
    }

    /// Top-level function `name` defined in `module`.
    pub fn function(&self, module: &str, name: &str) -> Option<FuncId> {
        let mi = self.module_index(module)?;
        let func = self.modules[mi]
            .funcs
            .iter()
            .position(|f| f.method.is_none() && f.qualname == name)?;
        Some(FuncId { module: mi, func })
    }

    pub fn class_id(&self, module: &str, name: &str) -> Option<ClassId> {
        let mi = self.module_index(module)?;
        let class = self.modules[mi].classes.iter().position(|c| &*c.name == name)?;
        Some(ClassId { module: mi, class })
    }
}

fn code_table(ast: &AstModule) -> Vec<(String, usize, Option<usize>)> {
    let mut out = Vec::new();
    for (i, item) in ast.items.iter().enumerate() {
        match item {
            Item::Function(f) => out.push((f.name.clone(), i, None)),
            Item::Class(c) => {
                for (j, m) in c.methods.iter().enumerate() {
                    out.push((format!("{}.{}", c.name, m.name), i, Some(j)));
                }
            }
            Item::Use(_) => {}
        }
    }
    out
}

fn code_objects(name: &str, ast: Arc<AstModule>) -> ModuleInfo {
    let funcs: Vec<FuncInfo> = code_table(&ast)
        .into_iter()
        .map(|(qualname, item, method)| FuncInfo { qualname, item, method })
        .collect();
    let mut classes = Vec::new();
    for c in ast.classes() {
        let methods = c
            .methods
            .iter()
            .map(|m| {
                let q = format!("{}.{}", c.name, m.name);
                (m.name.clone(), funcs.iter().position(|f| f.qualname == q).unwrap())
            })
            .collect();
        classes.push(ClassInfo {
            name: Arc::from(c.name.as_str()),
            methods,
        });
    }
    ModuleInfo {
        name: name.to_string(),
        ast,
        globals: HashMap::new(),
        funcs,
        classes,
    }
}
