use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// `E_y` over the whole grid, row-major with `x` fastest.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub nx: usize,
    pub nz: usize,
    pub cell: f64,
    pub step: usize,
    pub time: f64,
    pub data: Vec<f64>,
}

#[derive(Serialize)]
struct Header<'a> {
    field: &'a str,
    nx: usize,
    nz: usize,
    cell_m: f64,
    step: usize,
    time_s: f64,
    dtype: &'a str,
    layout: &'a str,
    data_file: String,
}

impl Snapshot {
    /// Writes `<stem>.bin` (little-endian f64) and `<stem>.json`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        let mut bytes = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let bin = format!("{stem}.bin");
        fs::write(dir.join(&bin), bytes)?;
        let header = Header {
            field: "Ey",
            nx: self.nx,
            nz: self.nz,
            cell_m: self.cell,
            step: self.step,
            time_s: self.time,
            dtype: "f64le",
            layout: "row-major, x fastest",
            data_file: bin,
        };
        let json = serde_json::to_string_pretty(&header).expect("header serializes");
        fs::write(dir.join(format!("{stem}.json")), json)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_binary_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let s = Snapshot {
            nx: 3,
            nz: 2,
            cell: 4e-8,
            step: 10,
            time: 1e-15,
            data: vec![0.0, 1.0, -2.5, 3.0, 4.0, 5.0],
        };
        s.write(dir.path(), "snap").unwrap();
        let bytes = fs::read(dir.path().join("snap.bin")).unwrap();
        assert_eq!(bytes.len(), 48);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), -2.5);
        let h: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("snap.json")).unwrap())
                .unwrap();
        assert_eq!(h["nx"], 3);
        assert_eq!(h["step"], 10);
    }
}
