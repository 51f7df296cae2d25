//! `{{name}}` placeholder substitution.

use crate::error::{Error, Result};

/// Substitute every `{{name}}` in `template`. Unknown or unterminated
/// placeholders are errors; unused variables are not.
pub fn fill(template: &str, vars: &[(&str, &str)]) -> Result<String> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find("{{") {
        out.push_str(&rest[..open]);
        let after = &rest[open + 2..];
        let close = after
            .find("}}")
            .ok_or_else(|| Error::Template(format!("unterminated placeholder in {template:?}")))?;
        let name = after[..close].trim();
        let value = vars
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Template(format!("unknown placeholder `{name}`")))?;
        out.push_str(value);
        rest = &after[close + 2..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Names of the placeholders in `template`, in order of appearance.
pub fn placeholders(template: &str) -> Vec<&str> {
    let mut names = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find("{{") {
        let after = &rest[open + 2..];
        match after.find("}}") {
            Some(close) => {
                names.push(after[..close].trim());
                rest = &after[close + 2..];
            }
            None => break,
        }
    }
    names
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fills_and_rejects() {
        assert_eq!(fill("a {{x}} b {{ y }}", &[("x", "1"), ("y", "2")]).unwrap(), "a 1 b 2");
        assert_eq!(fill("no vars", &[("x", "1")]).unwrap(), "no vars");
        assert!(matches!(fill("{{z}}", &[]), Err(Error::Template(_))));
        assert!(matches!(fill("{{open", &[]), Err(Error::Template(_))));
        // substituted values are not re-expanded
        assert_eq!(fill("{{x}}", &[("x", "{{x}}")]).unwrap(), "{{x}}");
    }

    #[test]
    fn lists_placeholders() {
        assert_eq!(placeholders("{{a}} and {{ b }} {{c"), vec!["a", "b"]);
    }
}
