//! `BHF1` field snapshots and CSV export.
//!
//! A snapshot is one ASCII header line
//!
//! ```text
//! BHF1 kind=box nx=64 nz=64 Lx=2.0 Lz=1.0 t=0.5 name=u ncomp=2 [key=value ...]
//! ```
//!
//! followed by `ncomp·nx·nz` little-endian `f64` values, x fastest,
//! components concatenated. Trailing `key=value` tokens carry tags such as
//! `xsample=1,2` or `eps=0.125`.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::fields::{FieldError, Grid, GridKind, ScalarField, VectorField};
use crate::Real;

pub const MAGIC: &str = "BHF1";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("bad header: {0}")]
    Header(String),
    #[error("payload ends after {got} of {expected} values")]
    Truncated { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T: Real> {
    pub grid: Grid<T>,
    pub t: T,
    pub name: String,
    pub components: Vec<ScalarField<T>>,
    pub tags: Vec<(String, String)>,
}

fn check_token(s: &str) -> Result<(), SnapshotError> {
    if s.is_empty() || s.chars().any(|c| c.is_whitespace() || c == '=') {
        return Err(SnapshotError::Header(format!("invalid token {s:?}")));
    }
    Ok(())
}

impl<T: Real> Snapshot<T> {
    pub fn scalar(name: &str, t: T, f: &ScalarField<T>) -> Self {
        Snapshot {
            grid: *f.grid(),
            t,
            name: name.into(),
            components: vec![f.clone()],
            tags: Vec::new(),
        }
    }

    pub fn vector(name: &str, t: T, u: &VectorField<T>) -> Self {
        Snapshot {
            grid: *u.grid(),
            t,
            name: name.into(),
            components: u.components().to_vec(),
            tags: Vec::new(),
        }
    }

    pub fn with_tag(mut self, key: &str, value: impl ToString) -> Self {
        self.tags.retain(|(k, _)| k != key);
        self.tags.push((key.into(), value.to_string()));
        self
    }

    pub fn tag(&self, key: &str) -> Option<&str> {
        self.tags.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn xsample(&self) -> Option<(usize, usize)> {
        let (i, j) = self.tag("xsample")?.split_once(',')?;
        Some((i.parse().ok()?, j.parse().ok()?))
    }

    pub fn eps(&self) -> Option<f64> {
        self.tag("eps")?.parse().ok()
    }

    pub fn as_vector(&self) -> Result<VectorField<T>, SnapshotError> {
        match self.components.as_slice() {
            [a, b] => Ok(VectorField::new(a.clone(), b.clone())?),
            _ => Err(SnapshotError::Header(format!(
                "expected 2 components, found {}",
                self.components.len()
            ))),
        }
    }

    pub fn header(&self) -> String {
        let g = &self.grid;
        let mut s = format!(
            "{MAGIC} kind={} nx={} nz={} Lx={:?} Lz={:?} t={:?} name={} ncomp={}",
            g.kind().as_str(),
            g.nx(),
            g.nz(),
            g.lx().as_f64(),
            g.lz().as_f64(),
            self.t.as_f64(),
            self.name,
            self.components.len()
        );
        for (k, v) in &self.tags {
            let _ = write!(s, " {k}={v}");
        }
        s
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), SnapshotError> {
        check_token(&self.name)?;
        for (k, v) in &self.tags {
            check_token(k)?;
            check_token(v)?;
        }
        for c in &self.components {
            if c.grid() != &self.grid {
                return Err(FieldError::GridMismatch.into());
            }
        }
        writeln!(w, "{}", self.header())?;
        for c in &self.components {
            for v in c.values() {
                w.write_all(&v.as_f64().to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut r: R) -> Result<Self, SnapshotError> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let line = line
            .strip_suffix('\n')
            .ok_or_else(|| SnapshotError::Header("missing newline".into()))?;
        let mut tokens = line.split(' ');
        if tokens.next() != Some(MAGIC) {
            return Err(SnapshotError::Header("missing BHF1 magic".into()));
        }
        let mut kv = Vec::new();
        for tok in tokens {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| SnapshotError::Header(format!("token {tok:?} is not key=value")))?;
            kv.push((k.to_string(), v.to_string()));
        }
        let mut take = |key: &str| -> Result<String, SnapshotError> {
            let pos = kv
                .iter()
                .position(|(k, _)| k == key)
                .ok_or_else(|| SnapshotError::Header(format!("missing {key}")))?;
            Ok(kv.remove(pos).1)
        };
        fn num<U: std::str::FromStr>(key: &str, s: String) -> Result<U, SnapshotError> {
            s.parse()
                .map_err(|_| SnapshotError::Header(format!("{key}={s} does not parse")))
        }
        let kind = GridKind::parse(&take("kind")?).ok_or_else(|| SnapshotError::Header("unknown kind".into()))?;
        let nx: usize = num("nx", take("nx")?)?;
        let nz: usize = num("nz", take("nz")?)?;
        let lx: f64 = num("Lx", take("Lx")?)?;
        let lz: f64 = num("Lz", take("Lz")?)?;
        let t: f64 = num("t", take("t")?)?;
        let name = take("name")?;
        let ncomp: usize = num("ncomp", take("ncomp")?)?;
        let grid = Grid::new(kind, nx, nz, T::lit(lx), T::lit(lz))?;
        let n = nx * nz;
        let mut components = Vec::with_capacity(ncomp);
        let mut buf = [0u8; 8];
        for c in 0..ncomp {
            let mut values = Vec::with_capacity(n);
            for j in 0..n {
                r.read_exact(&mut buf).map_err(|e| match e.kind() {
                    io::ErrorKind::UnexpectedEof => SnapshotError::Truncated {
                        expected: ncomp * n,
                        got: c * n + j,
                    },
                    _ => SnapshotError::Io(e),
                })?;
                values.push(T::lit(f64::from_le_bytes(buf)));
            }
            components.push(ScalarField::from_vec(grid, values)?);
        }
        Ok(Snapshot {
            grid,
            t: T::lit(t),
            name,
            components,
            tags: kv,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SnapshotError> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SnapshotError> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    /// `x,z,value[,value2]` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), SnapshotError> {
        let mut head = String::from("x,z");
        for c in 0..self.components.len() {
            if c == 0 {
                head.push_str(",value");
            } else {
                let _ = write!(head, ",value{}", c + 1);
            }
        }
        writeln!(w, "{head}")?;
        for (i, k, x, z) in self.grid.nodes() {
            let mut row = format!("{:.16e},{:.16e}", x.as_f64(), z.as_f64());
            for c in &self.components {
                let _ = write!(row, ",{:.16e}", c.at(i, k).as_f64());
            }
            writeln!(w, "{row}")?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot<f64> {
        let g = Grid::<f64>::new_box(8, 10, 2.0, 1.0 / 3.0).unwrap();
        let u = VectorField::from_fn(g, |x, z| [x.sin() / 7.0, (z * 1e-300).exp() - 1.0 + z * z]);
        Snapshot::vector("u", 0.1 + 0.2, &u)
            .with_tag("eps", 0.125)
            .with_tag("xsample", "1,2")
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let s = sample();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        let r = Snapshot::<f64>::read_from(buf.as_slice()).unwrap();
        assert_eq!(r, s);
        assert_eq!(r.header(), s.header());
        assert_eq!(r.xsample(), Some((1, 2)));
        assert_eq!(r.eps(), Some(0.125));
        let mut again = Vec::new();
        r.write_to(&mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn header_layout() {
        let h = sample().header();
        assert!(
            h.starts_with("BHF1 kind=box nx=8 nz=10 Lx=2.0 Lz=0.3333333333333333 t=0.30000000000000004 name=u ncomp=2")
        );
    }

    #[test]
    fn truncated_payload_is_reported() {
        let mut buf = Vec::new();
        sample().write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(
            Snapshot::<f64>::read_from(buf.as_slice()),
            Err(SnapshotError::Truncated { .. })
        ));
    }

    #[test]
    fn rejects_bad_names_and_magic() {
        let mut s = sample();
        s.name = "two words".into();
        assert!(s.write_to(Vec::new()).is_err());
        assert!(Snapshot::<f64>::read_from("BHF2 kind=box\n".as_bytes()).is_err());
    }

    #[test]
    fn csv_has_seventeen_digits() {
        let mut out = Vec::new();
        sample().write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,z,value,value2"));
        let row: Vec<f64> = lines.nth(13).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        let s = sample();
        let (i, k) = (13 % 8, 13 / 8);
        assert_eq!(row[2], s.components[0].at(i, k));
        assert_eq!(row[3], s.components[1].at(i, k));
        assert_eq!(text.lines().count(), 1 + 80);
    }
}
