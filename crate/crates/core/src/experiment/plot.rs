//! gnuplot script generation. Nothing here runs gnuplot.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{CURVES_FILE, CURVES_HEADER, REGION_FRONTIERS_FILE, REGION_FRONTIERS_HEADER};
use crate::error::{Error, Result};

pub const PLOT_FILE: &str = "plots.gp";

enum Kind {
    Region,
    Curves,
}

/// gnuplot single-quoted string literal.
fn quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', "''"))
}

/// Distinct values of column `col`, in order of first appearance.
fn distinct(text: &str, col: usize) -> Vec<String> {
    let mut seen: Vec<String> = Vec::new();
    for line in text.lines().skip(1) {
        if let Some(v) = line.split(',').nth(col) {
            if !v.is_empty() && !seen.iter().any(|s| s == v) {
                seen.push(v.to_string());
            }
        }
    }
    seen
}

fn png_for(csv: &Path) -> PathBuf {
    csv.with_extension("png")
}

fn region_block(out: &mut String, path: &Path, text: &str) {
    let file = quote(path);
    let schemes = distinct(text, 0);
    let cases = distinct(text, 1);
    let _ = writeln!(out, "# rate regions from {}", path.display());
    if cases.is_empty() {
        let _ = writeln!(out, "# (no data rows)\n");
        return;
    }
    let _ = writeln!(out, "set terminal pngcairo size {},450", 480 * cases.len());
    let _ = writeln!(out, "set output {}", quote(&png_for(path)));
    let _ = writeln!(
        out,
        "set multiplot layout 1,{} title 'Semantic-versus-bit rate regions'",
        cases.len()
    );
    let _ = writeln!(out, "set xlabel 'semantic rate (suts/s)'");
    let _ = writeln!(out, "set ylabel 'bit rate (bits/s)'");
    for case in &cases {
        let _ = writeln!(out, "set title '{case}'");
        let series: Vec<String> = schemes
            .iter()
            .map(|s| {
                format!(
                    "{file} every ::1 using ((strcol(1) eq '{s}' && strcol(2) eq '{case}') ? $3 : 1/0):4 \
                     with lines lw 2 title '{s}'"
                )
            })
            .collect();
        let _ = writeln!(out, "plot {}", series.join(", \\\n     "));
    }
    let _ = writeln!(out, "unset multiplot\nunset output\n");
}

fn curves_block(out: &mut String, path: &Path, text: &str) {
    let file = quote(path);
    let schemes = distinct(text, 0);
    let _ = writeln!(out, "# ergodic rate curves from {}", path.display());
    if schemes.is_empty() {
        let _ = writeln!(out, "# (no data rows)\n");
        return;
    }
    let _ = writeln!(out, "set terminal pngcairo size 640,480");
    let _ = writeln!(out, "set output {}", quote(&png_for(path)));
    let _ = writeln!(
        out,
        "set title 'Secondary-user ergodic rate vs primary requirement'"
    );
    let _ = writeln!(out, "set xlabel 'required primary ergodic rate (bits/s)'");
    let _ = writeln!(out, "set ylabel 'ergodic equivalent semantic rate (suts/s)'");
    let series: Vec<String> = schemes
        .iter()
        .map(|s| {
            format!("{file} every ::1 using (strcol(1) eq '{s}' ? $2 : 1/0):3 with linespoints title '{s}'")
        })
        .collect();
    let _ = writeln!(out, "plot {}", series.join(", \\\n     "));
    let _ = writeln!(out, "unset output\n");
}

/// Builds a script for the given result CSVs. The file kind is taken from the
/// header line; every missing path is reported at once.
pub fn plot_script(csv_paths: &[PathBuf]) -> Result<String> {
    let missing: Vec<PathBuf> = csv_paths.iter().filter(|p| !p.is_file()).cloned().collect();
    if !missing.is_empty() {
        return Err(Error::MissingInputs(missing));
    }
    let mut out =
        String::from("# gnuplot script\nset datafile separator ','\nset key top right\nset grid\n\n");
    for path in csv_paths {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let kind = match text.lines().next() {
            Some(REGION_FRONTIERS_HEADER) => Kind::Region,
            Some(CURVES_HEADER) => Kind::Curves,
            _ => {
                return Err(Error::invalid(format!(
                    "{} is not a recognized result CSV",
                    path.display()
                )))
            }
        };
        match kind {
            Kind::Region => region_block(&mut out, path, &text),
            Kind::Curves => curves_block(&mut out, path, &text),
        }
    }
    Ok(out)
}

/// Writes [`plot_script`] to `out_path`.
pub fn emit_plot_script(csv_paths: &[PathBuf], out_path: &Path) -> Result<PathBuf> {
    let script = plot_script(csv_paths)?;
    fs::write(out_path, script).map_err(|e| Error::io(out_path, e))?;
    Ok(out_path.to_path_buf())
}

/// Script for whichever result CSVs exist in `dir`, written to `dir/plots.gp`.
pub fn plot_from_dir(dir: &Path) -> Result<PathBuf> {
    let candidates = [dir.join(REGION_FRONTIERS_FILE), dir.join(CURVES_FILE)];
    let present: Vec<PathBuf> = candidates.iter().filter(|p| p.is_file()).cloned().collect();
    if present.is_empty() {
        return Err(Error::MissingInputs(candidates.to_vec()));
    }
    emit_plot_script(&present, &dir.join(PLOT_FILE))
}
