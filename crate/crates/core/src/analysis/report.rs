use std::fmt;

/// Acceptance rule for one measured value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// `|measured - value| ≤ tol`.
    Within { value: f64, tol: f64 },
    /// `lo ≤ measured ≤ hi`.
    Bracket { lo: f64, hi: f64 },
    AtMost(f64),
    AtLeast(f64),
}

impl Target {
    pub fn accepts(&self, x: f64) -> bool {
        if x.is_nan() {
            return false;
        }
        match *self {
            Target::Within { value, tol } => (x - value).abs() <= tol,
            Target::Bracket { lo, hi } => lo <= x && x <= hi,
            Target::AtMost(b) => x <= b,
            Target::AtLeast(b) => x >= b,
        }
    }

    /// `(target, tolerance)` columns; one-sided bounds carry a `<=`/`>=` prefix.
    pub fn columns(&self) -> (String, String) {
        match *self {
            Target::Within { value, tol } => (format!("{value:.16e}"), format!("{tol:.16e}")),
            Target::Bracket { lo, hi } => (
                format!("{:.16e}", 0.5 * (lo + hi)),
                format!("{:.16e}", 0.5 * (hi - lo)),
            ),
            Target::AtMost(b) => (format!("<={b:.16e}"), "0".into()),
            Target::AtLeast(b) => (format!(">={b:.16e}"), "0".into()),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Target::Within { value, tol } => write!(f, "{value:e} ± {tol:e}"),
            Target::Bracket { lo, hi } => write!(f, "[{lo:e}, {hi:e}]"),
            Target::AtMost(b) => write!(f, "<= {b:e}"),
            Target::AtLeast(b) => write!(f, ">= {b:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub target: Target,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, target: Target) -> Self {
        Self {
            name: name.into(),
            measured,
            pass: target.accepts(measured),
            target,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: measured {:.6e}, target {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.target
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn add(&mut self, name: impl Into<String>, measured: f64, target: Target) {
        self.push(Check::new(name, measured, target));
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.checks.extend(other.checks);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rule() {
        assert!(Target::Within { value: 0.5, tol: 0.05 }.accepts(0.54));
        assert!(!Target::Within { value: 0.5, tol: 0.05 }.accepts(0.56));
        assert!(Target::Bracket { lo: 3.2, hi: 4.8 }.accepts(4.0));
        assert!(!Target::AtMost(1e-8).accepts(f64::NAN));
        assert!(Target::AtLeast(-1e-3).accepts(0.0));
    }

    #[test]
    fn bracket_columns_are_centre_and_half_width() {
        let (t, tol) = Target::Bracket { lo: 3.2, hi: 4.8 }.columns();
        assert_eq!(t.parse::<f64>().unwrap(), 4.0);
        assert!((tol.parse::<f64>().unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn report_aggregates() {
        let mut r = ValidationReport::default();
        r.add("a", 1.0, Target::AtMost(2.0));
        assert!(r.all_pass());
        r.add("b", 3.0, Target::AtMost(2.0));
        assert!(!r.all_pass());
        assert_eq!(r.failures().count(), 1);
        assert!(r.get("b").unwrap().to_string().starts_with("FAIL b"));
    }
}
