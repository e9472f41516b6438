//! Comma-separated result files with a `#` metadata header.
//!
//! Numbers carry 12 significant digits; an empty cell means undefined.

use std::fmt::Write as _;

use crate::config::hash_text;
use crate::ensemble::EnsembleResult;
use crate::sweep::SweepTable;
use crate::system::LevelTable;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column order of trace files.
pub const TRACE_COLUMNS: [&str; 7] =
    ["time_ns", "pop_even", "pop_odd", "pop_total", "align_even", "align_odd", "align_total"];

const CONVENTIONS: [&str; 5] = [
    "time in ns, frequencies in MHz (E/h), intensity in W/cm^2",
    "populations: probability of the projected manifold per initial atom pair; even and odd are per family, total weights them by nuclear-spin statistics",
    "alignment: <cos^2 theta> of the projected manifold, conditional on being in it (renormalized by its population)",
    "alignment is left empty where the projected population is below the floor",
    "first pulse centered at 5 sigma; t = 0 is the start of its window",
];

/// 12 significant digits in scientific notation.
pub fn number(v: f64) -> String {
    format!("{v:.11e}")
}

fn optional(v: Option<f64>) -> String {
    v.map(number).unwrap_or_default()
}

fn header(out: &mut String, kind: &str, config_hash: &str, conventions: &[&str], extra: &[(&str, String)]) {
    let _ = writeln!(out, "# photoalign {TOOL_VERSION} {kind}");
    let _ = writeln!(out, "# config_sha256: {config_hash}");
    for c in conventions {
        let _ = writeln!(out, "# {c}");
    }
    for (k, v) in extra {
        let _ = writeln!(out, "# {k}: {v}");
    }
}

/// Time series of one thermal run.
pub fn trace_csv(result: &EnsembleResult, config_hash: &str, projection: &str) -> String {
    let floor = result.alignment_floor;
    let mut out = String::new();
    header(
        &mut out,
        "trace",
        config_hash,
        &CONVENTIONS,
        &[
            ("projection", projection.to_string()),
            ("alignment_floor", number(floor)),
            ("parity_fractions", format!("even {} odd {}", number(result.fractions.even), number(result.fractions.odd))),
            ("truncated_thermal_fraction", number(result.truncated_fraction)),
        ],
    );
    let _ = writeln!(out, "{}", TRACE_COLUMNS.join(","));
    let (ae, ao, at) = (result.even.alignment(floor), result.odd.alignment(floor), result.total.alignment(floor));
    for (k, t) in result.times.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            number(*t),
            number(result.even.population[k]),
            number(result.odd.population[k]),
            number(result.total.population[k]),
            optional(ae[k]),
            optional(ao[k]),
            optional(at[k]),
        );
    }
    out
}

/// Hash identifying one sweep point: the model fingerprint plus the resolved run.
pub fn point_hash(model_fingerprint: &str, canonical_run: &str) -> String {
    hash_text(&format!("{model_fingerprint}\n{canonical_run}"))
}

/// One row per point in plan order.
pub fn sweep_csv(table: &SweepTable, config_hash: &str, model_fingerprint: &str) -> String {
    let mut out = String::new();
    header(&mut out, "sweep", config_hash, &CONVENTIONS, &[("points", table.rows.len().to_string())]);
    let mut cols: Vec<String> = table
        .parameters
        .iter()
        .map(|p| if p.unit().is_empty() { p.name().to_string() } else { format!("{}_{}", p.name(), unit_tag(p.unit())) })
        .collect();
    cols.extend(table.outputs.iter().map(|o| o.name().to_string()));
    cols.extend(
        ["pop_even", "pop_odd", "max_norm_drift", "accepted_steps", "rejected_steps", "error", "point_sha256"]
            .map(String::from),
    );
    let _ = writeln!(out, "{}", cols.join(","));
    for row in &table.rows {
        let mut cells: Vec<String> = row.coordinates.iter().map(|&v| number(v)).collect();
        match &row.outcome {
            Ok(s) => {
                cells.extend(table.outputs.iter().map(|o| optional(o.read(s))));
                cells.push(number(s.population_even));
                cells.push(number(s.population_odd));
                cells.push(number(s.max_norm_drift));
                cells.push(s.accepted_steps.to_string());
                cells.push(s.rejected_steps.to_string());
                cells.push(String::new());
            }
            Err(f) => {
                cells.extend(std::iter::repeat_n(String::new(), table.outputs.len() + 5));
                cells.push(f.code.to_string());
            }
        }
        cells.push(point_hash(model_fingerprint, &row.spec.canonical()));
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

fn unit_tag(unit: &str) -> String {
    unit.replace("/cm^2", "_per_cm2").replace('/', "_per_")
}

/// One block of rows per channel: level index, energy, B_v and outer turning point.
pub fn eigen_csv(tables: &[LevelTable], config_hash: &str) -> String {
    let mut out = String::new();
    header(&mut out, "eigen", config_hash, &CONVENTIONS[..1], &[]);
    let _ = writeln!(out, "manifold,j,omega,v,energy_mhz,b_v_mhz,outer_turning_point_bohr");
    for t in tables {
        let sol = &t.solution;
        let l = sol.label();
        for v in 0..sol.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                l.manifold,
                l.j,
                l.omega,
                v,
                number(sol.energy_mhz(v)),
                number(t.rotational_constants_mhz[v]),
                optional(sol.outer_turning_point(v)),
            );
        }
    }
    out
}
