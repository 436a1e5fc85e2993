//! `slipstream-field-v1` container: a magic line, one JSON header line, then
//! the named nodal arrays as little-endian f64 in header order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::fields::ScalarField;
use super::grid::{Grid, GridSpec};
use crate::error::{Error, Result};

pub const MAGIC: &str = "slipstream-field-v1";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    grid: GridSpec,
    t: f64,
    y_nodes: Vec<f64>,
    fields: Vec<FieldEntry>,
    #[serde(default)]
    meta: serde_json::Value,
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldEntry {
    name: String,
    shape: [usize; 2],
}

/// Named nodal arrays on one grid at one time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub grid: GridSpec,
    pub t: f64,
    pub fields: Vec<(String, Array2<f64>)>,
    /// Free-form extra data (solver history, run ids).
    pub meta: serde_json::Value,
}

impl Snapshot {
    pub fn new(grid: GridSpec, t: f64) -> Self {
        Self {
            grid,
            t,
            fields: Vec::new(),
            meta: serde_json::Value::Null,
        }
    }

    pub fn with_field(mut self, name: &str, values: Array2<f64>) -> Self {
        self.fields.push((name.to_string(), values));
        self
    }

    pub fn with_scalar(self, name: &str, f: &ScalarField) -> Self {
        self.with_field(name, f.values().clone())
    }

    pub fn field(&self, name: &str) -> Result<&Array2<f64>> {
        self.fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| a)
            .ok_or_else(|| Error::Format(format!("snapshot has no field '{name}'")))
    }

    pub fn scalar(&self, grid: &Arc<Grid>, name: &str) -> Result<ScalarField> {
        if *grid.spec() != self.grid {
            return Err(Error::Format("snapshot grid does not match".into()));
        }
        let a = self.field(name)?;
        if a.dim() != (grid.ny(), grid.nx()) {
            return Err(Error::Format(format!("field '{name}' has shape {:?}", a.dim())));
        }
        Ok(ScalarField::new(grid.clone(), a.clone()))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            grid: self.grid,
            t: self.t,
            y_nodes: self.grid.y_nodes(),
            fields: self
                .fields
                .iter()
                .map(|(n, a)| FieldEntry {
                    name: n.clone(),
                    shape: [a.nrows(), a.ncols()],
                })
                .collect(),
            meta: self.meta.clone(),
        };
        writeln!(w, "{MAGIC}")?;
        serde_json::to_writer(&mut w, &header)?;
        writeln!(w)?;
        for (_, a) in &self.fields {
            for v in a.iter() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut line = String::new();
        r.read_line(&mut line)?;
        if line.trim_end() != MAGIC {
            return Err(Error::Format(format!("bad magic line {:?}", line.trim_end())));
        }
        line.clear();
        r.read_line(&mut line)?;
        let header: Header = serde_json::from_str(line.trim_end())?;
        let mut fields = Vec::with_capacity(header.fields.len());
        for fe in header.fields {
            let n = fe.shape[0] * fe.shape[1];
            let mut buf = vec![0u8; 8 * n];
            r.read_exact(&mut buf)
                .map_err(|e| Error::Format(format!("field '{}' truncated: {e}", fe.name)))?;
            let data: Vec<f64> = buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            let a = Array2::from_shape_vec((fe.shape[0], fe.shape[1]), data)
                .map_err(|e| Error::Format(e.to_string()))?;
            fields.push((fe.name, a));
        }
        Ok(Self {
            grid: header.grid,
            t: header.t,
            fields,
            meta: header.meta,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bitwise() {
        let spec = GridSpec::channel(8, 16);
        let g = Grid::new(spec).unwrap();
        let f = ScalarField::from_fn(&g, |x, y| (x * 1.3).sin() * y.exp() + 1e-300);
        let mut snap = Snapshot::new(spec, 0.125).with_scalar("omega", &f);
        snap.meta = serde_json::json!({"step": 3});
        let mut buf = Vec::new();
        snap.write_to(&mut buf).unwrap();
        assert!(buf.starts_with(b"slipstream-field-v1\n"));
        let back = Snapshot::read_from(&buf[..]).unwrap();
        assert_eq!(back.t, 0.125);
        assert_eq!(back.meta["step"], 3);
        let bf = back.scalar(&g, "omega").unwrap();
        assert!(bf.values().iter().zip(f.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert!(back.field("psi").is_err());
    }

    #[test]
    fn rejects_wrong_magic_and_truncation() {
        assert!(Snapshot::read_from(&b"nope\n{}\n"[..]).is_err());
        let spec = GridSpec::channel(8, 16);
        let snap = Snapshot::new(spec, 0.0).with_field("a", Array2::zeros((16, 8)));
        let mut buf = Vec::new();
        snap.write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 5);
        assert!(matches!(Snapshot::read_from(&buf[..]), Err(Error::Format(_))));
    }
}
