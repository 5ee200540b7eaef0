//! Collision-free identifiers for generated code.

use std::collections::HashSet;

use crate::frontend::is_keyword;

/// Names the generated files bind at module level or rely on as builtins.
const RESERVED: &[&str] = &[
    "self", "inputs", "tf", "keras", "layers", "torch", "nn", "OrderedDict", "Permute", "Reshape",
    "resolve_activation", "build_model", "train", "make_loader", "INPUT_SHAPE", "DATASETS",
    "METRICS", "super", "print", "range", "str", "len", "list", "tuple", "dict", "int", "float",
    "ValueError", "_",
];

pub(crate) fn is_reserved(name: &str) -> bool {
    is_keyword(name) || RESERVED.contains(&name)
}

/// A Python identifier for `name`: invalid characters become `_`, a
/// leading digit gets a `_` prefix, and keywords or reserved names get a
/// `_` suffix.
pub(crate) fn sanitize(name: &str) -> String {
    let mut id: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if id.is_empty() || id.starts_with(|c: char| c.is_ascii_digit()) {
        id.insert(0, '_');
    }
    if is_reserved(&id) {
        id.push('_');
    }
    id
}

#[derive(Debug, Clone, PartialEq, Default)]
pub(crate) struct Names {
    used: HashSet<String>,
}

impl Names {
    /// Sanitized `base`, suffixed `_1`, `_2`, ... until unused.
    pub fn claim(&mut self, base: &str) -> String {
        let base = sanitize(base);
        let name = if self.used.contains(&base) {
            (1..)
                .map(|i| format!("{base}_{i}"))
                .find(|n| !self.used.contains(n))
                .expect("unbounded counter")
        } else {
            base
        };
        self.used.insert(name.clone());
        name
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collisions_get_suffixes() {
        let mut n = Names::default();
        assert_eq!(n.claim("layer"), "layer");
        assert_eq!(n.claim("layer_1"), "layer_1");
        assert_eq!(n.claim("layer"), "layer_2");
        assert_eq!(n.claim("class"), "class_");
        assert_eq!(n.claim("conv-1"), "conv_1");
        assert_eq!(n.claim("1x1"), "_1x1");
        assert_eq!(n.claim("inputs"), "inputs_");
    }
}
