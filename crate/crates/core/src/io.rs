//! Design files and atomic output writes.
//!
//! A design file uses the config syntax with a single `[design]` section.
//! Numbers are written in shortest round-trip form, so reading a design back
//! reproduces the gains bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::config::{
    count, fmt_matrix, fmt_vector, matrix, scalar, text, vector, Document, Reader, Section, SynthesisKind,
};
use crate::error::{EscError, Result};
use crate::synthesis::{AwDesign, GradSatDesign};

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| EscError::InvalidArgument(format!("'{}' is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Design {
    Aw(AwDesign),
    GradSat(GradSatDesign),
}

impl Design {
    pub fn kind(&self) -> SynthesisKind {
        match self {
            Design::Aw(_) => SynthesisKind::AntiWindup,
            Design::GradSat(_) => SynthesisKind::GradientSaturation,
        }
    }

    pub fn k(&self) -> &DMatrix<f64> {
        match self {
            Design::Aw(d) => &d.k,
            Design::GradSat(d) => &d.k,
        }
    }

    pub fn to_document(&self) -> Document {
        let mut s = Section::new("design");
        s.push("kind", self.kind().name());
        match self {
            Design::Aw(d) => {
                s.push("eta", d.eta);
                s.push("k", fmt_matrix(&d.k));
                s.push("k_aw", fmt_matrix(&d.k_aw));
                s.push("p", fmt_matrix(&d.p));
                s.push("lambda", fmt_matrix(&d.lambda));
                s.push("kappa", d.kappa);
                s.push("slack", d.slack);
                s.push("iterations", d.iterations);
                d.warnings.iter().for_each(|w| s.push("warning", w));
            }
            Design::GradSat(d) => {
                s.push("eta", d.eta);
                s.push("epsilon", d.epsilon);
                s.push("bounds", fmt_vector(&d.bounds));
                s.push("k", fmt_matrix(&d.k));
                s.push("l", fmt_matrix(&d.l));
                s.push("w", fmt_matrix(&d.w));
                s.push("x", fmt_matrix(&d.x));
                s.push("y", fmt_matrix(&d.y));
                s.push("upsilon_tilde", fmt_matrix(&d.upsilon_tilde));
                s.push("p", fmt_matrix(&d.p));
                s.push("kappa_g", d.kappa_g);
                s.push("slack", d.slack);
                s.push("iterations", d.iterations);
                d.warnings.iter().for_each(|w| s.push("warning", w));
            }
        }
        Document { sections: vec![s] }
    }

    pub fn from_document(doc: &Document) -> Result<Self> {
        let bad = |m: &str| EscError::Parse {
            line: 1,
            column: 1,
            message: m.to_owned(),
        };
        if doc.sections.len() != 1 {
            return Err(bad("a design file holds exactly one [design] section"));
        }
        let sec = doc.section("design").ok_or_else(|| bad("missing [design] section"))?;
        let mut r = Reader::new(sec);
        let design = match r.req("kind", SynthesisKind::parse)? {
            SynthesisKind::AntiWindup => Design::Aw(AwDesign {
                eta: r.req("eta", scalar)?,
                k: r.req("k", matrix)?,
                k_aw: r.req("k_aw", matrix)?,
                p: r.req("p", matrix)?,
                lambda: r.req("lambda", matrix)?,
                kappa: r.req("kappa", scalar)?,
                slack: r.req("slack", scalar)?,
                iterations: r.req("iterations", count)?,
                warnings: r.many("warning", text)?,
            }),
            SynthesisKind::GradientSaturation => Design::GradSat(GradSatDesign {
                eta: r.req("eta", scalar)?,
                epsilon: r.req("epsilon", scalar)?,
                bounds: r.req("bounds", vector)?,
                k: r.req("k", matrix)?,
                l: r.req("l", matrix)?,
                w: r.req("w", matrix)?,
                x: r.req("x", matrix)?,
                y: r.req("y", matrix)?,
                upsilon_tilde: r.req("upsilon_tilde", matrix)?,
                p: r.req("p", matrix)?,
                kappa_g: r.req("kappa_g", scalar)?,
                slack: r.req("slack", scalar)?,
                iterations: r.req("iterations", count)?,
                warnings: r.many("warning", text)?,
            }),
        };
        r.finish()?;
        let n = design.k().nrows();
        let square = |m: &DMatrix<f64>| m.nrows() == n && m.ncols() == n;
        let ok = match &design {
            Design::Aw(d) => [&d.k, &d.k_aw, &d.p, &d.lambda].into_iter().all(square),
            Design::GradSat(d) => {
                [&d.k, &d.l, &d.w, &d.x, &d.y, &d.upsilon_tilde, &d.p]
                    .into_iter()
                    .all(square)
                    && d.bounds.len() == n
            }
        };
        if !ok {
            return Err(bad("design matrices disagree in size"));
        }
        Ok(design)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_document(&Document::parse(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_document().to_string().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aw() -> AwDesign {
        AwDesign {
            k: DMatrix::from_row_slice(2, 2, &[-0.1, 0.2 / 3.0, 0.05, -1e-17]),
            k_aw: DMatrix::identity(2, 2) * 2.0204,
            p: DMatrix::identity(2, 2) * 2862.0,
            lambda: DMatrix::identity(2, 2) * 2862.0,
            eta: 1.0,
            kappa: 1.0,
            slack: -2862.37,
            iterations: 176,
            warnings: vec!["P is poorly conditioned".into()],
        }
    }

    #[test]
    fn aw_round_trip_is_exact() {
        let d = Design::Aw(aw());
        let back = Design::parse(&d.to_document().to_string()).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn gradsat_round_trip_is_exact() {
        let m = DMatrix::from_fn(3, 3, |i, j| (i as f64 + 1.0) / (j as f64 + 3.0));
        let d = Design::GradSat(GradSatDesign {
            k: m.clone(),
            l: m.transpose(),
            w: m.clone() * 2.0,
            x: m.clone() * 3.0,
            y: m.clone() * 4.0,
            upsilon_tilde: DMatrix::identity(3, 3) * 7.0,
            p: m.clone() * 5.0,
            eta: 0.5,
            epsilon: 0.25,
            bounds: vec![1.0, 2.0, 3.0],
            kappa_g: 1.3,
            slack: -0.75,
            iterations: 107,
            warnings: vec![],
        });
        assert_eq!(d, Design::parse(&d.to_document().to_string()).unwrap());
    }

    #[test]
    fn rejects_mismatched_sizes_and_unknown_keys() {
        let text = Design::Aw(aw()).to_document().to_string();
        let bad = text.replace("kappa = 1", "kappa = 1\ncolour = red");
        assert!(matches!(Design::parse(&bad), Err(EscError::Parse { .. })));
        let bad = text.replace("k_aw = 2.0204, 0; 0, 2.0204", "k_aw = 2.0204");
        assert!(Design::parse(&bad).is_err());
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("out.txt");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "second");
        let leftovers: Vec<_> = fs::read_dir(path.parent().unwrap()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }
}
