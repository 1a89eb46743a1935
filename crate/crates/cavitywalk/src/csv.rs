//! Deterministic CSV emission.
//!
//! Floats are written with Rust's shortest round-trip formatting (`{}`),
//! which is locale-independent, so identical inputs always produce
//! byte-identical files. Files are written atomically: the content goes to a
//! temporary file in the target directory first and is renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

/// `step,t_kappa,alpha2_0..alpha2_{n-1},beta2_0..beta2_{n-1},norm2,vacuum`
pub fn quantum_header(n: usize) -> String {
    let mut header = String::from("step,t_kappa");
    for k in 0..n {
        write!(header, ",alpha2_{k}").unwrap();
    }
    for k in 0..n {
        write!(header, ",beta2_{k}").unwrap();
    }
    header.push_str(",norm2,vacuum");
    header
}

pub const ENTANGLEMENT_HEADER: &str = "step,t_kappa,E_full,E_cavities,E_atoms,E_bipartite,\
L_full,L_cav,L_atoms,L_bip,gmax_full,gmax_cav,gmax_atoms,gmax_bip";

pub fn random_walk_header(n: usize) -> String {
    let mut header = String::from("step,t_kappa");
    for k in 0..n {
        write!(header, ",p_{k}").unwrap();
    }
    header
}

pub const COMPARE_HEADER: &str = "step,t_kappa,tv_distance";

/// Append one `step,t_kappa,<values…>` row.
pub fn push_row(out: &mut String, step: usize, t_kappa: f64, values: &[f64]) {
    write!(out, "{step},{t_kappa}").unwrap();
    for v in values {
        write!(out, ",{v}").unwrap();
    }
    out.push('\n');
}

/// The n1×n2 grid of |α|² values, a blank line, then the |β|² grid; row i1,
/// column i2, comma-separated.
pub fn snapshot_grid(alpha2: &[f64], beta2: &[f64], n1: usize, n2: usize) -> String {
    let mut out = String::new();
    for (which, block) in [alpha2, beta2].into_iter().enumerate() {
        if which == 1 {
            out.push('\n');
        }
        for row in 0..n1 {
            for col in 0..n2 {
                if col > 0 {
                    out.push(',');
                }
                write!(out, "{}", block[row * n2 + col]).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

/// Write `content` to `path` via a temporary file in the same directory,
/// renamed into place so readers never observe a partial file.
pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(content.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
