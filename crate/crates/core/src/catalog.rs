//! The shipped example catalog.

use crate::dsl::{load, Definitions};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogItem {
    pub id: &'static str,
    pub file: &'static str,
    pub description: &'static str,
    /// Tag of the statement the item exercises, in report-tag form.
    pub anchor: &'static str,
    /// Expected verdict per suite (`true` = pass).
    pub expected: &'static [(&'static str, bool)],
    pub source: &'static str,
}

impl CatalogItem {
    pub fn load(&self) -> Result<Definitions> {
        load(self.source)
    }

    pub fn expects(&self, suite: &str) -> Option<bool> {
        self.expected.iter().find(|(s, _)| *s == suite).map(|(_, v)| *v)
    }
}

const PASSING: &[(&str, bool)] = &[
    ("structure", true),
    ("groupoid", true),
    ("lcs-groupoid", true),
    ("jacobi-groupoid", true),
    ("theorem-4-6", true),
    ("algebroid", true),
];

const FAILING: &[(&str, bool)] =
    &[("structure", true), ("groupoid", true), ("lcs-groupoid", false), ("jacobi-groupoid", false), ("theorem-4-6", true)];

pub const CATALOG: &[CatalogItem] = &[
    CatalogItem {
        id: "pair_symplectic",
        file: "pair_symplectic.geo",
        description: "symplectic pair groupoid over (R^2, dp^dq)",
        anchor: "Ex4.2/ii",
        expected: PASSING,
        source: include_str!("../catalog/pair_symplectic.geo"),
    },
    CatalogItem {
        id: "cotangent_additive",
        file: "cotangent_additive.geo",
        description: "symplectic groupoid of zero Poisson base (T*R^2, fiberwise sum)",
        anchor: "Ex4.2/ii",
        expected: PASSING,
        source: include_str!("../catalog/cotangent_additive.geo"),
    },
    CatalogItem {
        id: "contact_to_lcs",
        file: "contact_cotangent.geo",
        description: "contact groupoid T*R^2 x R and the l.c.s. groupoid built from it",
        anchor: "Prop3.1 Ex4.2/i",
        expected: &[
            ("structure", true),
            ("groupoid", true),
            ("contact-groupoid", true),
            ("prop-3-1", true),
            ("lcs-groupoid", true),
            ("jacobi-groupoid", true),
            ("theorem-4-6", true),
            ("algebroid", true),
        ],
        source: include_str!("../catalog/contact_cotangent.geo"),
    },
    CatalogItem {
        id: "contact_r3",
        file: "contact_r3.geo",
        description: "contact R^3 with dz - y dx and its l.c.s. pair of the first kind",
        anchor: "Eq.11 Eq.12",
        expected: &[("structure", true)],
        source: include_str!("../catalog/contact_r3.geo"),
    },
    CatalogItem {
        id: "pair_lcs",
        file: "pair_lcs.geo",
        description: "pair groupoid with Omega = e^f(x)(dp1^dq1 - dp2^dq2), sigma = f(x) - f(y)",
        anchor: "Def4.1",
        expected: PASSING,
        source: include_str!("../catalog/pair_lcs.geo"),
    },
    CatalogItem {
        id: "broken_omega",
        file: "broken_omega.geo",
        description: "pair_symplectic with a non-multiplicative Omega",
        anchor: "Ex4.2/ii Eq.14",
        expected: FAILING,
        source: include_str!("../catalog/broken_omega.geo"),
    },
    CatalogItem {
        id: "broken_lee",
        file: "broken_lee.geo",
        description: "pair_symplectic with a non-closed Lee form",
        anchor: "Ex4.2/ii Eq.1",
        expected: &[("structure", false), ("lcs-groupoid", false)],
        source: include_str!("../catalog/broken_lee.geo"),
    },
    CatalogItem {
        id: "broken_sigma",
        file: "broken_sigma.geo",
        description: "pair_symplectic with a non-multiplicative sigma",
        anchor: "Ex4.2/ii Def4.1",
        expected: &[("structure", true), ("lcs-groupoid", false), ("jacobi-groupoid", false), ("theorem-4-6", true)],
        source: include_str!("../catalog/broken_sigma.geo"),
    },
    CatalogItem {
        id: "wrong_sigma",
        file: "wrong_sigma.geo",
        description: "pair_symplectic with a multiplicative sigma that omega = 0 does not allow",
        anchor: "Def4.1 Eq.15",
        expected: FAILING,
        source: include_str!("../catalog/wrong_sigma.geo"),
    },
    CatalogItem {
        id: "lcs_sigma_dropped",
        file: "lcs_sigma_dropped.geo",
        description: "pair_lcs with sigma replaced by zero",
        anchor: "Def4.1 Eq.14",
        expected: FAILING,
        source: include_str!("../catalog/lcs_sigma_dropped.geo"),
    },
];

/// Looks up an item by id or file name.
pub fn find(key: &str) -> Result<&'static CatalogItem> {
    CATALOG
        .iter()
        .find(|c| c.id == key || c.file == key)
        .ok_or_else(|| Error::Definition(format!("no catalog item `{key}`")))
}

/// The catalog as a text table.
pub fn list_catalog() -> String {
    let mut out = format!("{:<20} {:<24} {:<18} {}\n", "id", "file", "anchor", "description / expected");
    for c in CATALOG {
        out.push_str(&format!("{:<20} {:<24} {:<18} {}\n", c.id, c.file, c.anchor, c.description));
        let exp: Vec<String> =
            c.expected.iter().map(|(s, v)| format!("{s}={}", if *v { "pass" } else { "fail" })).collect();
        out.push_str(&format!("{:<64} {}\n", "", exp.join(" ")));
    }
    out
}
