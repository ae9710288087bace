use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fem::{FeField, FemSpace};

use super::experiment::{RunOutput, RunRecord};

pub const RESULTS_HEADER: [&str; 12] = [
    "id", "dim", "alpha", "delta", "omega", "beta", "L", "eps", "err", "K", "seconds", "seed",
];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_results(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(RESULTS_HEADER).map_err(csv_err(path))?;
    for r in records {
        w.write_record([
            r.id.clone(),
            r.dim.to_string(),
            r.alpha.to_string(),
            r.delta.to_string(),
            r.omega.clone(),
            r.beta.to_string(),
            r.l.to_string(),
            r.eps.to_string(),
            r.err.to_string(),
            r.k.to_string(),
            format!("{:.3}", r.seconds),
            r.seed.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Nodal values of `f_true` and `f_rec`, one row per mesh node.
pub fn write_profile(path: &Path, space: &FemSpace, f_true: &FeField, f_rec: &FeField) -> Result<()> {
    space.check(f_true)?;
    space.check(f_rec)?;
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let dim = space.dim();
    if dim == 1 {
        w.write_record(["x", "f_true", "f_rec"]).map_err(csv_err(path))?;
    } else {
        w.write_record(["x1", "x2", "f_true", "f_rec"]).map_err(csv_err(path))?;
    }
    for (i, x) in space.mesh().nodes().enumerate() {
        let mut row: Vec<String> = x.iter().map(|c| c.to_string()).collect();
        row.push(f_true.0[i].to_string());
        row.push(f_rec.0[i].to_string());
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// gnuplot script that draws the profile CSV next to it.
pub fn plot_script(id: &str, dim: usize, profile_file: &str) -> String {
    let head = format!(
        "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\nset output '{id}.png'\n"
    );
    let body = if dim == 1 {
        format!(
            "set xlabel 'x'\nplot '{profile_file}' using 1:2 with lines lw 2 title 'f_true', \\\n     '{profile_file}' using 1:3 with linespoints pt 7 ps 0.6 title 'f_rec'\n"
        )
    } else {
        format!(
            "set xlabel 'x1'\nset ylabel 'x2'\nset dgrid3d 41,41\nset hidden3d\nsplot '{profile_file}' using 1:2:3 with lines title 'f_true', \\\n      '{profile_file}' using 1:2:4 with lines title 'f_rec'\n"
        )
    };
    head + &body
}

/// Files written for one run.
#[derive(Debug, Clone)]
pub struct Emitted {
    pub results: PathBuf,
    pub profile: PathBuf,
    pub script: PathBuf,
    pub record: PathBuf,
}

/// Writes `<id>.results.csv`, `<id>.profile.csv`, `<id>.gp` and `<id>.record.json` into `dir`.
pub fn emit_outputs(dir: &Path, run: &RunOutput) -> Result<Emitted> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let id = &run.record.id;
    let out = Emitted {
        results: dir.join(format!("{id}.results.csv")),
        profile: dir.join(format!("{id}.profile.csv")),
        script: dir.join(format!("{id}.gp")),
        record: dir.join(format!("{id}.record.json")),
    };
    write_results(&out.results, std::slice::from_ref(&run.record))?;
    write_profile(&out.profile, &run.space, &run.f_true, &run.f_rec)?;
    let profile_name = format!("{id}.profile.csv");
    fs::write(&out.script, plot_script(id, run.space.dim(), &profile_name)).map_err(io_err(&out.script))?;
    write_json(&out.record, &run.record)?;
    Ok(out)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assemble;
    use crate::mesh::build_mesh;

    fn tmp(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("fracsrc-output-{}-{name}", std::process::id()));
        fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn profile_rows() {
        let d = tmp("profile");
        for (dim, rows) in [(1, 41), (2, 1681)] {
            let s = assemble(build_mesh(dim, 40).unwrap()).unwrap();
            let f = s.interpolate(|x| x[0]);
            let p = d.join(format!("p{dim}.csv"));
            write_profile(&p, &s, &f, &f).unwrap();
            let text = fs::read_to_string(&p).unwrap();
            let lines: Vec<&str> = text.lines().collect();
            assert_eq!(lines.len(), rows + 1);
            let cols = if dim == 1 { 3 } else { 4 };
            assert_eq!(lines[0].split(',').count(), cols);
            assert_eq!(lines[rows].split(',').count(), cols);
        }
        fs::remove_dir_all(d).unwrap();
    }

    #[test]
    fn missing_directory_reports_path() {
        let s = assemble(build_mesh(1, 4).unwrap()).unwrap();
        let f = s.interpolate(|x| x[0]);
        let p = Path::new("/nonexistent-dir-for-test/p.csv");
        let e = write_profile(p, &s, &f, &f).unwrap_err();
        assert!(e.to_string().contains("nonexistent-dir-for-test"));
    }

    #[test]
    fn script_mentions_profile() {
        let s = plot_script("1d-a", 1, "1d-a.profile.csv");
        assert!(s.contains("'1d-a.profile.csv' using 1:3"));
        assert!(plot_script("2d-a", 2, "q.csv").contains("splot"));
    }
}
