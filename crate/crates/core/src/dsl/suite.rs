use std::time::Instant;

use rayon::prelude::*;

use super::{Definitions, Structure, StructureKind};
use crate::error::{Error, Result};
use crate::groupoid::{
    check_axioms, check_derived_axioms, check_multiplicative, crosscheck_action_cotangent, crosscheck_action_tangent,
    CotangentGroupoid, TangentGroupoid,
};
use crate::jacobi::{check_contact_manifold, check_jacobi, check_lcs, check_reeb, lcs_to_jacobi};
use crate::lcs::{
    check_contact_groupoid, check_jacobi_groupoid, check_koszul, check_lcs_groupoid,
    check_lcs_from_contact, theorem_4_6_crosscheck, verify_algebroid_iso, JacobiMode, LcsGroupoid,
};
use crate::report::{CheckEntry, CheckReport, Settings};

/// Suites every file understands. `full` runs all that apply.
pub const BUILTIN_SUITES: [&str; 9] = [
    "structure",
    "groupoid",
    "contact-groupoid",
    "prop-3-1",
    "lcs-groupoid",
    "jacobi-groupoid",
    "theorem-4-6",
    "algebroid",
    "full",
];

/// Built-in suite names with one-line descriptions.
pub fn builtin_suites() -> Vec<(&'static str, &'static str)> {
    vec![
        ("structure", "pointwise l.c.s., contact or Jacobi identities of each structure"),
        ("groupoid", "groupoid axioms, multiplicative sigma, tangent and cotangent groupoids"),
        ("contact-groupoid", "multiplicativity of a contact form and its Reeb field"),
        ("prop-3-1", "the l.c.s. groupoid built from a contact groupoid"),
        ("lcs-groupoid", "the l.c.s. groupoid conditions"),
        ("jacobi-groupoid", "Jacobi groupoid conditions in both formulations"),
        ("theorem-4-6", "agreement of the l.c.s. and Jacobi groupoid verdicts"),
        ("algebroid", "theta0, the induced Jacobi structure and the algebroid isomorphism"),
        ("full", "every suite that applies"),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    pub settings: Settings,
    /// Stop after the first (structure, suite) unit with a failing entry.
    pub fail_fast: bool,
    /// Record wall time in `elapsed_ms`; otherwise it stays 0.
    pub timing: bool,
}

/// The l.c.s. groupoid of a structure: itself, or the one built from a
/// contact groupoid.
fn as_lcs_groupoid(s: &Structure) -> Option<Result<LcsGroupoid>> {
    s.lcs_groupoid()
}

fn with_lcs(s: &Structure, tag: &str, st: &Settings, f: impl FnOnce(&LcsGroupoid) -> Vec<CheckEntry>) -> Option<Vec<CheckEntry>> {
    as_lcs_groupoid(s).map(|r| match r {
        Ok(d) => f(&d),
        Err(e) => vec![CheckEntry::error("build", tag, &e, st.tol)],
    })
}

/// Entries of one built-in suite on one structure; `None` when it does not apply.
fn unit(s: &Structure, suite: &str, st: &Settings) -> Option<Vec<CheckEntry>> {
    use StructureKind as K;
    match suite {
        "structure" => Some(match &s.kind {
            K::Lcs(l) => lcs_entries(l, st),
            K::LcsGroupoid(d) => lcs_entries(&d.lcs, st),
            K::Contact(c) => check_contact_manifold(c, st),
            K::ContactGroupoid(d) => check_reeb(&d.contact, st),
            K::Jacobi(j) => check_jacobi(j, st),
            K::JacobiGroupoid(d) => check_jacobi(&d.jacobi, st),
        }),
        "groupoid" => s.groupoid().map(|(gp, sigma)| {
            let mut out = check_axioms(gp, st);
            out.extend(check_multiplicative(gp, sigma, st));
            out.extend(check_derived_axioms(&TangentGroupoid::new(gp), "tangent", "Sec3/TG", st));
            out.extend(check_derived_axioms(&CotangentGroupoid::new(gp), "cotangent", "Sec3/T*G", st));
            out.extend(check_derived_axioms(&CotangentGroupoid::twisted(gp, sigma), "cotangent_sigma", "Eq.20", st));
            out.extend(check_derived_axioms(&TangentGroupoid::extended(gp, sigma), "tangent_ext", "Eq.18", st));
            out.extend(check_derived_axioms(&CotangentGroupoid::extended(gp, sigma), "cotangent_ext", "Eq.19", st));
            for (id, tag, r) in [
                ("action.tangent_closed_form", "Eq.9", crosscheck_action_tangent(gp, sigma, st)),
                ("action.cotangent_closed_form", "Eq.10", crosscheck_action_cotangent(gp, sigma, st)),
            ] {
                out.push(r.unwrap_or_else(|e| CheckEntry::error(id, tag, &e, st.tol)));
            }
            out
        }),
        "contact-groupoid" => match &s.kind {
            K::ContactGroupoid(d) => Some(check_contact_groupoid(d, st)),
            _ => None,
        },
        "prop-3-1" => match &s.kind {
            K::ContactGroupoid(d) => Some(check_lcs_from_contact(d, st)),
            _ => None,
        },
        "lcs-groupoid" => with_lcs(s, "Def4.1", st, |d| check_lcs_groupoid(d, st)),
        "jacobi-groupoid" => {
            let run = |j: &crate::lcs::JacobiGroupoid| {
                let mut out = check_jacobi_groupoid(j, JacobiMode::Definition, st);
                out.extend(check_jacobi_groupoid(j, JacobiMode::Characterization, st));
                out
            };
            match &s.kind {
                K::JacobiGroupoid(j) => Some(run(j)),
                _ => with_lcs(s, "Def4.3", st, |d| match d.to_jacobi_groupoid() {
                    Ok(j) => run(&j),
                    Err(e) => vec![CheckEntry::error("jacobi_groupoid.build", "Def4.3", &e, st.tol)],
                }),
            }
        }
        "theorem-4-6" => with_lcs(s, "Thm4.6", st, |d| theorem_4_6_crosscheck(d, st).entries),
        "algebroid" => with_lcs(s, "Thm5.2", st, |d| {
            let mut out = verify_algebroid_iso(d, st);
            if d.lcs.lee.is_zero() && d.sigma.is_zero() {
                out.push(check_koszul(d, st));
            }
            out
        }),
        _ => None,
    }
}

fn lcs_entries(l: &crate::jacobi::LcsStructure, st: &Settings) -> Vec<CheckEntry> {
    let mut out = check_lcs(l, st);
    match lcs_to_jacobi(l) {
        Ok(j) => out.extend(check_jacobi(&j, st)),
        Err(e) => out.push(CheckEntry::error("jacobi.build", "Eq.12", &e, st.tol)),
    }
    out
}

/// `(structure index, built-in suite)` pairs requested by `suite`.
fn plan<'d>(defs: &'d Definitions, suite: &str) -> Result<Vec<(&'d Structure, &'static str)>> {
    let expand = |names: &[String]| -> Vec<&'static str> {
        if names.iter().any(|n| n == "full") {
            return BUILTIN_SUITES[..BUILTIN_SUITES.len() - 1].to_vec();
        }
        BUILTIN_SUITES.iter().copied().filter(|b| names.iter().any(|n| n == b)).collect()
    };
    let (builtins, only): (Vec<&'static str>, Option<&Vec<String>>) =
        if let Some(def) = defs.suites.iter().find(|s| s.name == suite) {
            (expand(&def.run), def.structures.as_ref())
        } else if BUILTIN_SUITES.contains(&suite) {
            (expand(&[suite.to_string()]), None)
        } else {
            return Err(Error::UnknownSuite(suite.to_string()));
        };
    let mut out = Vec::new();
    for s in &defs.structures {
        if only.is_some_and(|names| !names.contains(&s.name)) {
            continue;
        }
        for &b in &builtins {
            out.push((s, b));
        }
    }
    Ok(out)
}

/// Runs a named suite (file-defined or built-in) over the file's structures.
///
/// Entry ids are prefixed with the structure name; the report is sorted by
/// id. Fails with `Definition` when the suite applies to nothing.
pub fn run_suite(defs: &Definitions, suite: &str, opts: &RunOptions) -> Result<CheckReport> {
    let start = Instant::now();
    let st = &opts.settings;
    let plan = plan(defs, suite)?;
    let prefixed = |s: &Structure, es: Vec<CheckEntry>| -> Vec<CheckEntry> {
        es.into_iter().map(|e| CheckEntry { id: format!("{}.{}", s.name, e.id), ..e }).collect()
    };
    let mut units: Vec<Option<Vec<CheckEntry>>> = Vec::new();
    if opts.fail_fast {
        for (s, b) in &plan {
            let r = unit(s, b, st).map(|es| prefixed(s, es));
            let failed = r.as_ref().is_some_and(|es| es.iter().any(|e| !e.passed()));
            units.push(r);
            if failed {
                break;
            }
        }
    } else {
        units = plan.par_iter().map(|(s, b)| unit(s, b, st).map(|es| prefixed(s, es))).collect();
    }
    if units.iter().all(Option::is_none) {
        return Err(Error::Definition(format!("suite `{suite}` applies to no structure in this file")));
    }
    let mut report = CheckReport::new(suite, st);
    let mut entries: Vec<CheckEntry> = units.into_iter().flatten().flatten().collect();
    // suites share some conditions; identical entries are reported once
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    entries.dedup();
    report.extend(entries);
    let mut report = report.finish();
    if opts.timing {
        report.elapsed_ms = start.elapsed().as_millis() as u64;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::find;
    use crate::lcs::fixtures;

    fn opts() -> RunOptions {
        RunOptions { settings: Settings::default().with_samples(12), ..RunOptions::default() }
    }

    fn stripped(r: &CheckReport, prefix: &str) -> Vec<CheckEntry> {
        r.entries.iter().map(|e| CheckEntry { id: e.id[prefix.len() + 1..].to_string(), ..e.clone() }).collect()
    }

    #[test]
    fn catalog_files_match_fixtures() {
        let st = opts().settings;
        let cases: [(&str, LcsGroupoid); 4] = [
            ("pair_symplectic", fixtures::pair_symplectic()),
            ("pair_lcs", fixtures::pair_lcs()),
            ("broken_omega", fixtures::broken_omega()),
            ("cotangent_additive", fixtures::cotangent_symplectic()),
        ];
        for (id, fx) in cases {
            let d = find(id).unwrap().load().unwrap();
            let r = run_suite(&d, "lcs-groupoid", &opts()).unwrap();
            let mut want = check_lcs_groupoid(&fx, &st);
            want.sort_by(|a, b| a.id.cmp(&b.id));
            assert_eq!(stripped(&r, id), want, "{id}");
        }
        let d = find("contact_to_lcs").unwrap().load().unwrap();
        let r = run_suite(&d, "prop-3-1", &opts()).unwrap();
        let fx = fixtures::contact_cotangent("1 * dz - p1 * dx1 - p2 * dx2");
        let mut want = check_lcs_from_contact(&fx, &st);
        want.sort_by(|a, b| a.id.cmp(&b.id));
        assert_eq!(stripped(&r, "contact_to_lcs"), want);
    }

    #[test]
    fn unknown_and_inapplicable_suites() {
        let d = find("pair_symplectic").unwrap().load().unwrap();
        assert!(matches!(run_suite(&d, "nope", &opts()), Err(Error::UnknownSuite(_))));
        assert!(matches!(run_suite(&d, "prop-3-1", &opts()), Err(Error::Definition(_))));
    }

    #[test]
    fn fail_fast_stops_early() {
        let d = find("broken_omega").unwrap().load().unwrap();
        let all = run_suite(&d, "full", &opts()).unwrap();
        let ff = run_suite(&d, "full", &RunOptions { fail_fast: true, ..opts() }).unwrap();
        assert!(!ff.passed());
        assert!(ff.entries.len() < all.entries.len());
    }

    #[test]
    fn file_suites_restrict_structures() {
        let text = format!(
            "{}\n[structure other]\ntype = lcs\ngroupoid = pair\nomega = dp1^dq1 - dp2^dq2\n\
             [suite mine]\nrun = lcs-groupoid\nstructures = other\n",
            find("pair_symplectic").unwrap().source
        );
        let d = crate::dsl::load(&text).unwrap();
        let r = run_suite(&d, "mine", &opts()).unwrap();
        assert_eq!(r.suite, "mine");
        assert!(r.passed());
        assert!(r.entries.iter().all(|e| e.id.starts_with("other.")));
    }
}
