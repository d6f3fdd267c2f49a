//! Plain-text dispersion files, one per material.
//!
//! ```text
//! # name=TiO2 category=Dielectric
//! # any further comment
//! 400 2.87 0.0
//! 450 2.71 0.0
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use filmsearch_core::material::{Category, DispersionTable, MaterialDb, MaterialError, MaterialRecord};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Invalid {
        path: PathBuf,
        #[source]
        source: MaterialError,
    },
    #[error("no materials found in {}", .0.display())]
    Empty(PathBuf),
    #[error(transparent)]
    Database(#[from] MaterialError),
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CatalogError + '_ {
    move |source| CatalogError::Io { path: path.to_path_buf(), source }
}

/// Parses one dispersion file. `path` is only used in error messages.
pub fn parse_dispersion(text: &str, path: &Path) -> Result<(String, Category, DispersionTable), CatalogError> {
    let parse_err = |line: usize, message: String| CatalogError::Parse { path: path.to_path_buf(), line, message };
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .map(|(_, l)| l.trim())
        .filter(|l| l.starts_with('#'))
        .ok_or_else(|| parse_err(1, "first line must be `# name=<name> category=<category>`".into()))?;
    let field = |key: &str| -> Option<&str> {
        header.trim_start_matches('#').split_whitespace().find_map(|t| t.strip_prefix(key))
    };
    let name = field("name=").filter(|n| !n.is_empty()).ok_or_else(|| parse_err(1, "header lacks `name=`".into()))?;
    let category: Category = field("category=")
        .ok_or_else(|| parse_err(1, "header lacks `category=`".into()))?
        .parse()
        .map_err(|e: MaterialError| parse_err(1, e.to_string()))?;

    let (mut wl, mut n, mut k) = (Vec::new(), Vec::new(), Vec::new());
    for (i, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 3 {
            return Err(parse_err(i + 1, format!("expected `lambda_nm n k`, found {} columns", cols.len())));
        }
        let mut vals = [0.0; 3];
        for (v, c) in vals.iter_mut().zip(&cols) {
            *v = c.parse().map_err(|_| parse_err(i + 1, format!("`{c}` is not a number")))?;
        }
        wl.push(vals[0]);
        n.push(vals[1]);
        k.push(vals[2]);
    }
    let table = DispersionTable::new(wl, n, k)
        .map_err(|source| CatalogError::Invalid { path: path.to_path_buf(), source })?;
    Ok((name.to_string(), category, table))
}

/// Loads every non-hidden file in `dir`, in file-name order; ids follow
/// that order.
pub fn load_database(dir: &Path) -> Result<MaterialDb, CatalogError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_error(dir))?
        .map(|e| e.map(|e| e.path()).map_err(io_error(dir)))
        .collect::<Result<_, _>>()?;
    files.retain(|p| p.is_file() && !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')));
    files.sort();
    if files.is_empty() {
        return Err(CatalogError::Empty(dir.to_path_buf()));
    }
    let mut entries = Vec::with_capacity(files.len());
    for path in &files {
        let text = fs::read_to_string(path).map_err(io_error(path))?;
        entries.push(parse_dispersion(&text, path)?);
    }
    Ok(MaterialDb::new(entries)?)
}

/// File contents for one record. Numbers use the shortest representation
/// that parses back to the same value.
pub fn format_dispersion(record: &MaterialRecord) -> String {
    let mut out = format!("# name={} category={}\n# lambda_nm n k\n", record.name, record.category);
    let d = &record.dispersion;
    for ((w, n), k) in d.wavelengths_nm().iter().zip(d.n()).zip(d.k()) {
        let _ = writeln!(out, "{w} {n} {k}");
    }
    out
}

/// Writes one file per material. File names are zero-padded ids so that
/// loading the directory again reproduces the same id order.
pub fn write_database(db: &MaterialDb, dir: &Path) -> Result<(), CatalogError> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let width = db.len().to_string().len();
    for r in db.records() {
        let safe: String = r.name.chars().map(|c| if c.is_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect();
        let path = dir.join(format!("{:0width$}_{safe}.nk", r.id.0));
        fs::write(&path, format_dispersion(r)).map_err(io_error(&path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TIO2: &str = "# name=TiO2 category=Dielectric\n# comment\n400 2.9 0.01\n\n500 2.7 0\n600 2.6 0\n";

    #[test]
    fn parses_header_and_rows() {
        let (name, cat, t) = parse_dispersion(TIO2, Path::new("TiO2.nk")).unwrap();
        assert_eq!(name, "TiO2");
        assert_eq!(cat, Category::Dielectric);
        assert_eq!(t.wavelengths_nm(), &[400.0, 500.0, 600.0]);
        assert_eq!(t.k(), &[0.01, 0.0, 0.0]);
    }

    #[test]
    fn reports_file_and_line() {
        let bad = "# name=X category=Metal\n400 1 0\n500 1\n";
        let err = parse_dispersion(bad, Path::new("x.nk")).unwrap_err().to_string();
        assert!(err.starts_with("x.nk:3:"), "{err}");
        let err = parse_dispersion("400 1 0\n", Path::new("y.nk")).unwrap_err().to_string();
        assert!(err.starts_with("y.nk:1:"), "{err}");
        let err = parse_dispersion("# name=X category=Plasma\n", Path::new("z.nk")).unwrap_err().to_string();
        assert!(err.contains("Plasma"), "{err}");
    }

    #[test]
    fn decreasing_wavelengths_name_the_file() {
        let bad = "# name=X category=Metal\n500 1 0\n400 1 0\n";
        let err = parse_dispersion(bad, Path::new("down.nk")).unwrap_err().to_string();
        assert!(err.contains("down.nk") && err.contains("increasing"), "{err}");
    }
}
