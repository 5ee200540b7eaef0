//! Framework and style detection from imports and top-level constructs.

use std::collections::HashMap;
use std::fmt;

use super::ast::*;
use super::extract::ExtractError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Framework {
    /// Keras-style API, channels-last tensors.
    ChannelLast,
    /// Torch-style API, channels-first tensors.
    ChannelFirst,
}

impl Framework {
    pub fn as_str(self) -> &'static str {
        match self {
            Framework::ChannelLast => "tf",
            Framework::ChannelFirst => "pt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Style {
    Sequential,
    Subclassing,
}

impl Style {
    pub fn as_str(self) -> &'static str {
        match self {
            Style::Sequential => "sequential",
            Style::Subclassing => "subclassing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dialect {
    pub framework: Framework,
    pub style: Style,
}

impl Dialect {
    pub const ALL: [Dialect; 4] = [
        Dialect::new(Framework::ChannelLast, Style::Sequential),
        Dialect::new(Framework::ChannelLast, Style::Subclassing),
        Dialect::new(Framework::ChannelFirst, Style::Sequential),
        Dialect::new(Framework::ChannelFirst, Style::Subclassing),
    ];

    pub const fn new(framework: Framework, style: Style) -> Self {
        Dialect { framework, style }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.framework.as_str(), self.style.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub dialect: Dialect,
    /// Set when both styles were present and one had to be chosen.
    pub note: Option<String>,
}

/// Local names bound by import statements, mapped to canonical dotted paths.
///
/// `tensorflow.keras.*` is folded onto `keras.*` so both spellings of the
/// channel-last API resolve identically.
#[derive(Debug, Clone, Default)]
pub(crate) struct Imports {
    aliases: HashMap<String, String>,
}

fn canonical(path: &str) -> String {
    for prefix in ["tensorflow.keras", "tensorflow.python.keras", "tf_keras"] {
        if path == prefix {
            return "keras".into();
        }
        if let Some(rest) = path.strip_prefix(prefix).and_then(|r| r.strip_prefix('.')) {
            return format!("keras.{rest}");
        }
    }
    path.to_string()
}

impl Imports {
    pub fn collect(tree: &SyntaxTree) -> Self {
        let mut aliases = HashMap::new();
        walk_stmts(&tree.body, &mut |stmt| match &stmt.kind {
            StmtKind::Import(names) => {
                for a in names {
                    match &a.asname {
                        Some(local) => {
                            aliases.insert(local.clone(), canonical(&a.name));
                        }
                        None => {
                            let root = a.name.split('.').next().unwrap_or_default().to_string();
                            aliases.insert(root.clone(), root);
                        }
                    }
                }
            }
            StmtKind::ImportFrom { module, level: 0, names } => {
                for a in names {
                    if a.name == "*" {
                        continue;
                    }
                    let local = a.asname.clone().unwrap_or_else(|| a.name.clone());
                    aliases.insert(local, canonical(&format!("{module}.{}", a.name)));
                }
            }
            _ => {}
        });
        Imports { aliases }
    }

    /// Canonical dotted path of a name or attribute chain rooted at an import.
    pub fn resolve(&self, e: &Expr) -> Option<String> {
        let dotted = e.dotted()?;
        let (head, rest) = match dotted.split_once('.') {
            Some((h, r)) => (h, Some(r)),
            None => (dotted.as_str(), None),
        };
        let base = self.aliases.get(head)?;
        Some(canonical(&match rest {
            Some(r) => format!("{base}.{r}"),
            None => base.clone(),
        }))
    }

    pub fn roots(&self) -> impl Iterator<Item = &str> {
        self.aliases.values().map(|v| v.split('.').next().unwrap_or_default())
    }
}

pub(crate) fn framework_of_root(root: &str) -> Option<Framework> {
    match root {
        "tensorflow" | "keras" | "tf_keras" => Some(Framework::ChannelLast),
        "torch" | "torchvision" => Some(Framework::ChannelFirst),
        _ => None,
    }
}

pub(crate) fn is_model_base(path: &str, fw: Framework) -> bool {
    match fw {
        Framework::ChannelLast => matches!(path, "keras.Model" | "keras.models.Model"),
        Framework::ChannelFirst => path == "torch.nn.Module",
    }
}

pub(crate) fn is_sequential_ctor(path: &str, fw: Framework) -> bool {
    match fw {
        Framework::ChannelLast => matches!(path, "keras.Sequential" | "keras.models.Sequential"),
        Framework::ChannelFirst => path == "torch.nn.Sequential",
    }
}

/// Inline `Permute`/`Reshape` module classes that channel-first sequential
/// code defines to hold tensor ops; these are layers, not models.
pub(crate) fn is_layout_helper(name: &str, fw: Framework) -> bool {
    fw == Framework::ChannelFirst && matches!(name, "Permute" | "Reshape")
}

/// Names of classes that (transitively) derive from the framework's model base.
pub(crate) fn model_classes(tree: &SyntaxTree, imports: &Imports, fw: Framework) -> Vec<String> {
    let mut found: Vec<String> = Vec::new();
    // Iterate to a fixed point so subclasses of user model classes are found
    // regardless of declaration order.
    loop {
        let before = found.len();
        for stmt in &tree.body {
            if let StmtKind::ClassDef { name, bases, .. } = &stmt.kind {
                if found.contains(name) || is_layout_helper(name, fw) {
                    continue;
                }
                let derives = bases.iter().any(|b| {
                    imports.resolve(b).is_some_and(|p| is_model_base(&p, fw))
                        || b.as_name().is_some_and(|n| found.iter().any(|f| f == n))
                });
                if derives {
                    found.push(name.clone());
                }
            }
        }
        if found.len() == before {
            return found;
        }
    }
}

pub(crate) fn has_method(class: &Stmt, names: &[&str]) -> bool {
    let StmtKind::ClassDef { body, .. } = &class.kind else {
        return false;
    };
    body.iter()
        .any(|s| matches!(&s.kind, StmtKind::FunctionDef { name, .. } if names.contains(&name.as_str())))
}

pub(crate) fn forward_names(fw: Framework) -> &'static [&'static str] {
    match fw {
        Framework::ChannelLast => &["call"],
        Framework::ChannelFirst => &["forward"],
    }
}

/// Calls that build a sequential container outside model classes.
pub(crate) fn sequential_sites<'a>(tree: &'a SyntaxTree, imports: &Imports, fw: Framework) -> Vec<&'a Expr> {
    let mut sites = Vec::new();
    for stmt in tree.body.iter().filter(|s| !matches!(s.kind, StmtKind::ClassDef { .. })) {
        walk_body_exprs(std::slice::from_ref(stmt), &mut |e| {
            if let ExprKind::Call { func, .. } = &e.kind {
                if imports.resolve(func).is_some_and(|p| is_sequential_ctor(&p, fw)) {
                    sites.push(e);
                }
            }
        });
    }
    sites
}

pub fn detect_dialect(tree: &SyntaxTree) -> Result<Detection, ExtractError> {
    let imports = Imports::collect(tree);
    let mut frameworks: Vec<Framework> = imports.roots().filter_map(framework_of_root).collect();
    frameworks.sort_by_key(|f| f.as_str());
    frameworks.dedup();
    let fw = match frameworks.as_slice() {
        [] => return Err(ExtractError::UnknownDialect),
        [one] => *one,
        _ => return Err(ExtractError::MixedDialect),
    };

    let classes = model_classes(tree, &imports, fw);
    let subclassing: Vec<&str> = tree
        .body
        .iter()
        .filter_map(|s| match &s.kind {
            StmtKind::ClassDef { name, .. }
                if classes.contains(name) && has_method(s, &["__init__"]) && has_method(s, forward_names(fw)) =>
            {
                Some(name.as_str())
            }
            _ => None,
        })
        .collect();
    let sequential = !sequential_sites(tree, &imports, fw).is_empty();

    let style = match (subclassing.is_empty(), sequential) {
        (false, false) => Style::Subclassing,
        (true, true) => Style::Sequential,
        (true, false) => return Err(ExtractError::NoModel),
        (false, true) => {
            let style = terminal_style(tree, &imports, fw, &subclassing).unwrap_or(Style::Subclassing);
            return Ok(Detection {
                dialect: Dialect::new(fw, style),
                note: Some(format!(
                    "both a model class and a sequential container are defined; using {} style for the terminal model object",
                    style.as_str()
                )),
            });
        }
    };
    Ok(Detection {
        dialect: Dialect::new(fw, style),
        note: None,
    })
}

/// Style of the last top-level model object created in the script.
fn terminal_style(tree: &SyntaxTree, imports: &Imports, fw: Framework, classes: &[&str]) -> Option<Style> {
    let mut style = None;
    for stmt in &tree.body {
        let value = match &stmt.kind {
            StmtKind::Assign { value, .. } => value,
            StmtKind::Expr(e) => e,
            _ => continue,
        };
        if let ExprKind::Call { func, .. } = &value.kind {
            if func.as_name().is_some_and(|n| classes.contains(&n)) {
                style = Some(Style::Subclassing);
            } else if imports.resolve(func).is_some_and(|p| is_sequential_ctor(&p, fw)) {
                style = Some(Style::Sequential);
            }
        }
    }
    style
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn detect(src: &str) -> Result<Dialect, ExtractError> {
        detect_dialect(&parse_source(src).unwrap()).map(|d| d.dialect)
    }

    #[test]
    fn keras_sequential() {
        let src = "from tensorflow.keras import layers, models\nmodel = models.Sequential()\nmodel.add(layers.Dense(3))\n";
        assert_eq!(detect(src).unwrap(), Dialect::new(Framework::ChannelLast, Style::Sequential));
    }

    #[test]
    fn torch_subclass() {
        let src = "import torch.nn as nn\nclass Net(nn.Module):\n    def __init__(self):\n        super().__init__()\n    def forward(self, x):\n        return x\n";
        assert_eq!(detect(src).unwrap(), Dialect::new(Framework::ChannelFirst, Style::Subclassing));
    }

    #[test]
    fn no_framework_is_unknown() {
        assert!(matches!(detect("import os\nx = 1\n"), Err(ExtractError::UnknownDialect)));
    }

    #[test]
    fn both_frameworks_is_mixed() {
        assert!(matches!(detect("import torch\nimport tensorflow as tf\n"), Err(ExtractError::MixedDialect)));
    }

    #[test]
    fn aliases_resolve_to_canonical_paths() {
        let tree = parse_source("import tensorflow as tf\nfrom tensorflow.keras import layers as L\nx = tf.keras.layers.Dense\ny = L.Conv2D\n").unwrap();
        let imports = Imports::collect(&tree);
        let StmtKind::Assign { value, .. } = &tree.body[2].kind else { panic!() };
        assert_eq!(imports.resolve(value).as_deref(), Some("keras.layers.Dense"));
        let StmtKind::Assign { value, .. } = &tree.body[3].kind else { panic!() };
        assert_eq!(imports.resolve(value).as_deref(), Some("keras.layers.Conv2D"));
    }
}
