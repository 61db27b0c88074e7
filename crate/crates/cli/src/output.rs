use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use qsl_core::experiment::SpeedEstimate;
use qsl_core::BoundsRecord64;

/// Environment variable that overrides every output directory.
pub const OUTPUT_DIR_ENV: &str = "QSL_OUTPUT_DIR";

pub const TRAJECTORY_COLUMNS: [&str; 18] = [
    "l",
    "a",
    "a_dot",
    "a_dot_c",
    "a_dot_i",
    "lower",
    "upper",
    "b_ci_plus",
    "b_ci_minus",
    "b_ic_plus",
    "b_ic_minus",
    "mt",
    "pure_upper",
    "qfi_c",
    "qfi_i",
    "delta_ac",
    "delta_ai",
    "purity",
];

pub const EXPERIMENT_COLUMNS: [&str; 5] = ["l", "a_mean", "a_std", "speed_mean", "speed_std"];

pub fn resolve_output_dir(configured: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => configured.to_path_buf(),
    }
}

/// Seventeen significant digits in scientific notation; negative zero prints as zero.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.16e}", 0.0);
    }
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

pub fn trajectory_csv(records: &[BoundsRecord64]) -> String {
    let mut out = TRAJECTORY_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        let fields = [
            fmt_num(r.l),
            fmt_num(r.a),
            fmt_num(r.a_dot),
            fmt_num(r.a_dot_c),
            fmt_num(r.a_dot_i),
            fmt_num(r.lower),
            fmt_num(r.upper),
            fmt_num(r.b_ci_plus),
            fmt_num(r.b_ci_minus),
            fmt_num(r.b_ic_plus),
            fmt_num(r.b_ic_minus),
            fmt_opt(r.mt),
            fmt_opt(r.pure_upper),
            fmt_num(r.qfi_c),
            fmt_num(r.qfi_i),
            fmt_num(r.delta_a_c),
            fmt_num(r.delta_a_i),
            fmt_num(r.purity),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn experiment_csv(estimates: &[SpeedEstimate]) -> String {
    let mut out = EXPERIMENT_COLUMNS.join(",");
    out.push('\n');
    for e in estimates {
        let fields = [e.l, e.a_mean, e.a_std, e.speed_mean, e.speed_std].map(fmt_num);
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Writes `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents.as_bytes())?;
        file.sync_all()?;
    }
    fs::rename(&tmp, &target)?;
    Ok(target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_with_seventeen_digits() {
        for x in [std::f64::consts::PI, -1e-300, 0.1 + 0.2, 6.02214076e23, 1.0] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
        assert_eq!(fmt_num(-0.0), fmt_num(0.0));
    }

    #[test]
    fn atomic_write_leaves_only_target() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "x.csv", "a\n").unwrap();
        write_atomic(dir.path(), "x.csv", "b\n").unwrap();
        let names: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names, vec!["x.csv"]);
        assert_eq!(fs::read_to_string(dir.path().join("x.csv")).unwrap(), "b\n");
    }
}
