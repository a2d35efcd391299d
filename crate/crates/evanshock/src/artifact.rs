//! Deterministic artifact emission: 17-significant-digit float formatting,
//! small JSON/CSV writers, and the effective-config block embedded in every
//! output file. No wall-clock, no map iteration order; byte-identical output
//! for identical configs.

use crate::error::Result;
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::Path;

pub const SCHEMA_VERSION: &str = "1";

/// 17 significant digits, scientific; round-trips any f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Ordered key-value pairs describing the resolved configuration of a run.
#[derive(Clone, Debug, Default)]
pub struct EffectiveConfig {
    pub entries: Vec<(String, String)>,
}

impl EffectiveConfig {
    pub fn new(subcommand: &str) -> Self {
        let mut cfg = EffectiveConfig::default();
        cfg.push_str("subcommand", subcommand);
        cfg
    }

    pub fn push_str(&mut self, key: &str, value: impl AsRef<str>) {
        self.entries.push((key.to_string(), value.as_ref().to_string()));
    }

    pub fn push_float(&mut self, key: &str, value: f64) {
        self.entries.push((key.to_string(), fmt_float(value)));
    }

    pub fn push_int(&mut self, key: &str, value: i64) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// `# key = value` comment lines for CSV headers.
    pub fn comment_lines(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# evanshock-schema = {SCHEMA_VERSION}");
        for (k, v) in &self.entries {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out
    }

    /// `<!-- key = value -->` comment block for SVG.
    pub fn svg_comment(&self) -> String {
        let mut out = String::from("<!--\n");
        let _ = writeln!(out, "evanshock-schema = {SCHEMA_VERSION}");
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out.push_str("-->\n");
        out
    }

    pub fn to_json(&self) -> Json {
        Json::Obj(
            self.entries
                .iter()
                .map(|(k, v)| (k.clone(), Json::Str(v.clone())))
                .collect(),
        )
    }
}

/// Minimal JSON document model with deterministic rendering: objects keep
/// insertion order, floats print with 17 significant digits, non-finite
/// floats render as null.
#[derive(Clone, Debug)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn complex(z: Complex64) -> Json {
        Json::Obj(vec![("re".into(), Json::Num(z.re)), ("im".into(), Json::Num(z.im))])
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Num(x) => {
                if x.is_finite() {
                    let _ = write!(out, "{x:.16e}");
                } else {
                    out.push_str("null");
                }
            }
            Json::Str(s) => write_json_string(out, s),
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    push_indent(out, indent + 1);
                    item.write(out, indent + 1);
                }
                out.push('\n');
                push_indent(out, indent);
                out.push(']');
            }
            Json::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    push_indent(out, indent + 1);
                    write_json_string(out, k);
                    out.push_str(": ");
                    v.write(out, indent + 1);
                }
                out.push('\n');
                push_indent(out, indent);
                out.push('}');
            }
        }
    }
}

fn push_indent(out: &mut String, n: usize) {
    for _ in 0..n {
        out.push_str("  ");
    }
}

fn write_json_string(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Wrap a body object with the schema version and the effective config.
pub fn json_artifact(kind: &str, config: &EffectiveConfig, body: Vec<(String, Json)>) -> Json {
    let mut fields = vec![
        ("schema_version".into(), Json::Str(SCHEMA_VERSION.into())),
        ("kind".into(), Json::Str(kind.into())),
        ("config".into(), config.to_json()),
    ];
    fields.extend(body);
    Json::Obj(fields)
}

/// CSV with `#` comment lines carrying schema and config, '.' decimal,
/// ',' separator, LF endings.
pub struct CsvArtifact {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub config: EffectiveConfig,
}

impl CsvArtifact {
    pub fn render(&self) -> String {
        let mut out = self.config.comment_lines();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [1.0, -0.1, 2.1542e-7, 1669.123456789, f64::MIN_POSITIVE] {
            let s = fmt_float(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }

    #[test]
    fn json_renders_deterministically() {
        let doc = Json::Obj(vec![
            ("b".into(), Json::Num(0.5)),
            ("a".into(), Json::Arr(vec![Json::Int(1), Json::Null, Json::Bool(true)])),
            ("s".into(), Json::Str("quote \" and \\ newline\n".into())),
        ]);
        let one = doc.render();
        let two = doc.render();
        assert_eq!(one, two);
        assert!(one.contains("5.0000000000000000e-1"));
        assert!(one.contains("\\\""));
        // insertion order preserved
        assert!(one.find("\"b\"").unwrap() < one.find("\"a\"").unwrap());
    }

    #[test]
    fn nonfinite_floats_become_null() {
        let doc = Json::Num(f64::NAN);
        assert_eq!(doc.render().trim(), "null");
    }

    #[test]
    fn csv_has_schema_and_config_comments() {
        let mut config = EffectiveConfig::new("profile");
        config.push_float("gamma", 1.5);
        let csv = CsvArtifact {
            header: vec!["x".into(), "vhat".into()],
            rows: vec![vec!["0".into(), "1".into()]],
            config,
        };
        let text = csv.render();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# evanshock-schema = 1");
        assert!(text.contains("# subcommand = profile"));
        assert!(text.contains("# gamma = 1.5000000000000000e0"));
        assert!(text.ends_with("0,1\n"));
    }
}
