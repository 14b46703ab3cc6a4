//! Versioned column layouts of every subcommand's table.

use serde_json::{json, Value};

pub struct Schema {
    pub command: &'static str,
    pub version: u32,
    pub columns: &'static [(&'static str, &'static str)],
}

pub const SCHEMAS: &[Schema] = &[
    Schema {
        command: "characteristic",
        version: 1,
        columns: &[
            ("weight", "weight descriptor"),
            ("kind", "ap, a1, ainfty, rh, apq or sharp-rh"),
            ("p", "exponent p (empty when unused)"),
            ("q", "exponent q, or s for rh (empty when unused)"),
            ("value", "characteristic, or the exponent for sharp-rh"),
            ("witness_lo", "left end of the maximizing interval"),
            ("witness_hi", "right end of the maximizing interval"),
            ("witness_level", "dyadic level of the maximizing cube (empty for anchored intervals)"),
            ("witness_grid", "shift index t of the maximizing cube's grid"),
            ("cubes_scanned", "number of intervals searched"),
        ],
    },
    Schema {
        command: "weaktype",
        version: 1,
        columns: &[
            ("weight", "weight descriptor"),
            ("trial", "index of the seeded step function"),
            ("operator", "operator inside the multiplier form"),
            ("p", "input exponent"),
            ("q", "output exponent"),
            ("quotient", "sup over λ of λ^q |{|output| > λ}| / ‖f‖_p^q"),
            ("best_lambda", "λ attaining the supremum"),
            ("characteristic", "[w]_Ap (or [w]_A1 at p = 1); [w]_Apq for fractional operators"),
            ("ainfty", "[w]_A∞; [w^q]_A∞ for fractional operators"),
            ("constant", "quotient divided by the characteristic product"),
        ],
    },
    Schema {
        command: "lowerbound",
        version: 1,
        columns: &[
            ("delta", "parameter of the weight"),
            ("a1_char", "A1 characteristic over the anchored intervals"),
            ("sharp_rh_nu", "largest reverse Hölder exponent with characteristic at most 2"),
            ("lambda_star", "maximizing λ on the graded mesh"),
            ("quotient", "weak-type quotient on the graded mesh; a lower bound for C0"),
            ("closed_quotient", "same supremum with the level set located by root finding"),
            ("closed_lambda", "maximizing λ of the root-finding path"),
            ("ratio_to_sqrt_a1", "quotient / sqrt(a1_char)"),
            ("chain_bound", "F(e^(1/δ)) / 4"),
            ("mesh_cells", "cells of the graded mesh"),
            ("cells_in_level_set", "graded cells inside the maximizing level set"),
        ],
    },
    Schema {
        command: "sparse-check",
        version: 1,
        columns: &[
            ("trial", "index of the seeded step function"),
            ("grid", "shift index t of the grid"),
            ("family_cubes", "cubes in the stopping-time family"),
            ("min_ratio", "min |E_Q| / |Q|"),
            ("maximal_ratio", "max over cells of M f / A f (at most 4)"),
            ("height", "CZ height"),
            ("cz_cubes", "maximal cubes of the CZ decomposition"),
            ("omega_measure", "|Ω|"),
            ("violations", "failed invariants separated by ';' (empty when all hold)"),
        ],
    },
    Schema {
        command: "matrix-check",
        version: 1,
        columns: &[
            ("trial", "index of the seeded matrix weight"),
            ("ap", "[W]_Ap"),
            ("ainfty_sc", "sup over sampled directions of [w_v]_A∞"),
            ("reducer_factor", "max(r, 1/r) for r = sup_Q ‖R_Q R'_Q‖ / [W]_Ap^(1/p)"),
            ("worst_ratio", "largest certified factor ratio of the primal reducers"),
            ("restriction_ratio", "max over directions of [w_v]_Ap / [W]_Ap"),
            ("nu", "reverse Hölder exponent used in the bound"),
            ("rhi_bound", "max over cubes of the averaged operator-norm power"),
            ("quotient", "weak-type quotient of the matrix maximal operator"),
            ("constant", "quotient / ([W]_Ap [W]_A∞sc^p)"),
            ("violations", "failed invariants separated by ';' (empty when all hold)"),
        ],
    },
    Schema {
        command: "constants",
        version: 1,
        columns: &[
            ("source", "weight descriptor, or `nu` when ν was given directly"),
            ("exponent", "working exponent p"),
            ("nu", "reverse Hölder exponent ν"),
            ("nu_conj", "ν'"),
            ("r_conj", "r' = p ν' + 1"),
            ("r", "r"),
            ("pr_conj", "(p r)'"),
            ("pnu_conj", "(p ν)'"),
            ("r_conj_pow_r", "(r')^r"),
        ],
    },
];

pub fn get(command: &str) -> &'static Schema {
    SCHEMAS.iter().find(|s| s.command == command).expect("every subcommand has a schema")
}

pub fn column_names(command: &str) -> Vec<&'static str> {
    get(command).columns.iter().map(|c| c.0).collect()
}

/// Column list for `--help`.
pub fn help(command: &str) -> String {
    let s = get(command);
    let mut out = format!("Columns (schema v{}):\n", s.version);
    for (name, desc) in s.columns {
        out.push_str(&format!("  {name:<20} {desc}\n"));
    }
    out
}

pub fn to_json() -> Value {
    let commands: serde_json::Map<String, Value> = SCHEMAS
        .iter()
        .map(|s| {
            let cols: Vec<Value> = s.columns.iter().map(|(n, d)| json!({"name": n, "description": d})).collect();
            (s.command.to_string(), json!({"version": s.version, "columns": cols}))
        })
        .collect();
    json!({ "commands": commands })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_file_is_current() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/schema.json");
        let rendered = serde_json::to_string_pretty(&to_json()).unwrap() + "\n";
        if std::env::var_os("WEAKLAB_BLESS").is_some() {
            std::fs::write(path, &rendered).unwrap();
        }
        assert_eq!(std::fs::read_to_string(path).unwrap(), rendered);
    }
}
