//! Python source formatting.

use std::fmt::Display;

/// Shortest round-trip decimal that Python reads back as a float.
pub(crate) fn float(f: f64) -> String {
    let s = format!("{f:?}");
    if s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

pub(crate) fn string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub(crate) fn tuple<T: Display>(items: &[T]) -> String {
    match items {
        [one] => format!("({one},)"),
        _ => format!("({})", join(items)),
    }
}

pub(crate) fn list<T: Display>(items: &[T]) -> String {
    format!("[{}]", join(items))
}

pub(crate) fn join<T: Display>(items: &[T]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

pub(crate) fn boolean(b: bool) -> &'static str {
    if b {
        "True"
    } else {
        "False"
    }
}

/// Line-oriented writer with 4-space indentation.
#[derive(Debug, Default)]
pub(crate) struct Code {
    out: String,
}

impl Code {
    pub fn line(&mut self, depth: usize, text: impl AsRef<str>) {
        for _ in 0..depth {
            self.out.push_str("    ");
        }
        self.out.push_str(text.as_ref());
        self.out.push('\n');
    }

    pub fn blank(&mut self) {
        self.out.push('\n');
    }

    /// Two blank lines before a top-level definition, unless at the start.
    pub fn section(&mut self) {
        if !self.out.is_empty() {
            while !self.out.ends_with("\n\n\n") {
                self.out.push('\n');
            }
        }
    }

    pub fn finish(mut self) -> String {
        while self.out.ends_with("\n\n") {
            self.out.pop();
        }
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_always_read_back_as_floats() {
        assert_eq!(float(0.001), "0.001");
        assert_eq!(float(1.0), "1.0");
        assert_eq!(float(1e-7), "1e-7");
        assert_eq!(float(0.5), "0.5");
    }

    #[test]
    fn tuples() {
        assert_eq!(tuple(&[3]), "(3,)");
        assert_eq!(tuple(&[3, 3]), "(3, 3)");
        assert_eq!(string("a\"b"), "\"a\\\"b\"");
    }
}
