//! Fixed inputs shared by the benchmarks.

use iwasawa_core::dirichlet::{DirichletChar, TwistedChar};

/// Characters spanning small and moderate conductors and residue degrees.
pub const LABELS: [(&str, u64); 4] = [("5.2", 3), ("13.4", 5), ("163.81", 3), ("19.6", 5)];

pub fn theta(label: &str) -> DirichletChar {
    DirichletChar::parse(label).expect("fixture labels are valid")
}

/// The first even twist of each fixture character.
pub fn twisted() -> Vec<(String, TwistedChar)> {
    LABELS
        .iter()
        .map(|&(label, p)| {
            let th = theta(label);
            let i = if th.is_even() { 0 } else { 1 };
            (format!("{label}@{p}"), TwistedChar::new(&th, i, p).expect("fixture characters are admissible"))
        })
        .collect()
}
