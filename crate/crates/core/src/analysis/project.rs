use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::warn;
use thiserror::Error;

use crate::lang::{self, AstModule, Item, SourceModule, SyntaxError};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{module}: {error}")]
    Syntax { module: String, error: SyntaxError },
}

/// What a name in a module namespace refers to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Binding {
    Function { module: String, name: String },
    Class { module: String, name: String },
    Module(String),
}

/// The module under test plus every context module reachable from it
/// through `use` directives, closed transitively.
#[derive(Debug, Clone)]
pub struct Project {
    pub main: String,
    pub modules: BTreeMap<String, Arc<AstModule>>,
    pub sources: BTreeMap<String, SourceModule>,
    /// Context files that could not be read or parsed, with the reason.
    pub skipped: Vec<(String, String)>,
    namespaces: BTreeMap<String, BTreeMap<String, Binding>>,
}

impl Project {
    /// Reads `<dir>/<module>.mdyn` and whatever it `use`s from the same
    /// directory. Broken context files are skipped with a warning.
    pub fn load(dir: &Path, module: &str) -> Result<Project, LoadError> {
        let path = dir.join(format!("{module}.{}", lang::EXTENSION));
        let text = std::fs::read_to_string(&path).map_err(|source| LoadError::Io { path: path.clone(), source })?;
        let main = SourceModule::new(module, path, text);
        Project::build(main, |name| {
            let path = dir.join(format!("{name}.{}", lang::EXTENSION));
            std::fs::read_to_string(&path)
                .map(|text| SourceModule::new(name, path, text))
                .map_err(|e| e.to_string())
        })
    }

    /// In-memory variant: `context` holds every other module that may be used.
    pub fn from_sources(main: SourceModule, context: impl IntoIterator<Item = SourceModule>) -> Result<Project, LoadError> {
        let pool: BTreeMap<String, SourceModule> = context.into_iter().map(|s| (s.name.clone(), s)).collect();
        Project::build(main, |name| pool.get(name).cloned().ok_or_else(|| "no such module".to_string()))
    }

    fn build(main: SourceModule, mut fetch: impl FnMut(&str) -> Result<SourceModule, String>) -> Result<Project, LoadError> {
        let ast = lang::parse_module(&main).map_err(|error| LoadError::Syntax {
            module: main.name.clone(),
            error,
        })?;
        let mut modules = BTreeMap::new();
        let mut sources = BTreeMap::new();
        let mut skipped = Vec::new();
        let mut pending: Vec<String> = ast.uses().map(|u| u.module.clone()).collect();
        let main_name = main.name.clone();
        modules.insert(main_name.clone(), Arc::new(ast));
        sources.insert(main_name.clone(), main);
        let mut seen: BTreeSet<String> = BTreeSet::from([main_name.clone()]);
        while let Some(name) = pending.pop() {
            if !seen.insert(name.clone()) {
                continue;
            }
            let src = match fetch(&name) {
                Ok(src) => src,
                Err(reason) => {
                    warn!("skipping context module {name}: {reason}");
                    skipped.push((name, reason));
                    continue;
                }
            };
            match lang::parse_module(&src) {
                Ok(m) => {
                    pending.extend(m.uses().map(|u| u.module.clone()));
                    modules.insert(name.clone(), Arc::new(m));
                    sources.insert(name, src);
                }
                Err(e) => {
                    warn!("skipping context module {name}: {e}");
                    skipped.push((name, e.to_string()));
                }
            }
        }
        let mut project = Project {
            main: main_name,
            modules,
            sources,
            skipped,
            namespaces: BTreeMap::new(),
        };
        let names: Vec<String> = project.modules.keys().cloned().collect();
        for name in names {
            let ns = project.compute_namespace(&name, &mut BTreeSet::new());
            project.namespaces.insert(name, ns);
        }
        Ok(project)
    }

    pub fn main_module(&self) -> &Arc<AstModule> {
        &self.modules[&self.main]
    }

    pub fn module(&self, name: &str) -> Option<&Arc<AstModule>> {
        self.modules.get(name)
    }

    /// Names visible at the top level of `module`.
    pub fn namespace(&self, module: &str) -> Option<&BTreeMap<String, Binding>> {
        self.namespaces.get(module)
    }

    pub fn lookup(&self, module: &str, name: &str) -> Option<&Binding> {
        self.namespaces.get(module).and_then(|ns| ns.get(name))
    }

    // Later `use` directives shadow earlier ones; own definitions shadow all.
    fn compute_namespace(&self, module: &str, visiting: &mut BTreeSet<String>) -> BTreeMap<String, Binding> {
        let mut ns = BTreeMap::new();
        let Some(ast) = self.modules.get(module) else {
            return ns;
        };
        visiting.insert(module.to_string());
        for u in ast.uses() {
            if !self.modules.contains_key(&u.module) {
                continue;
            }
            match &u.alias {
                Some(alias) => {
                    ns.insert(alias.clone(), Binding::Module(u.module.clone()));
                }
                None if !visiting.contains(&u.module) => {
                    ns.extend(self.compute_namespace(&u.module, visiting));
                }
                None => ns.extend(own_definitions(&u.module, &self.modules[&u.module])),
            }
        }
        visiting.remove(module);
        ns.extend(own_definitions(module, ast));
        ns
    }
}

fn own_definitions(module: &str, ast: &AstModule) -> BTreeMap<String, Binding> {
    let mut out = BTreeMap::new();
    for item in &ast.items {
        match item {
            Item::Function(f) => {
                out.insert(
                    f.name.clone(),
                    Binding::Function {
                        module: module.to_string(),
                        name: f.name.clone(),
                    },
                );
            }
            Item::Class(c) => {
                out.insert(
                    c.name.clone(),
                    Binding::Class {
                        module: module.to_string(),
                        name: c.name.clone(),
                    },
                );
            }
            Item::Use(_) => {}
        }
    }
    out
}
