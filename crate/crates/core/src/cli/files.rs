//! JSON channel and bath files. Complex numbers are `[re, im]` pairs and
//! matrices are row-major lists of rows.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::qcore::linalg::{c, CMatrix};
use crate::qcore::{Hermitian, ThermalContext};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelSpecFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BathSpecFile {
    pub beta: f64,
    pub hamiltonian: Value,
}

fn syntax(source: &str, e: serde_json::Error) -> Error {
    Error::input(format!("{source}:{}:{}: {e}", e.line(), e.column()))
}

fn entry(v: &Value, at: &str) -> Result<num_complex::Complex64> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::input(format!("{at}: expected a [re, im] pair, got {v}")))?;
    let part = |x: &Value, which: &str| {
        x.as_f64()
            .filter(|f| f.is_finite())
            .ok_or_else(|| Error::input(format!("{at}: {which} part {x} is not a finite number")))
    };
    Ok(c(part(&pair[0], "real")?, part(&pair[1], "imaginary")?))
}

/// Parses a `rows × cols` matrix, naming the offending position on failure.
fn matrix(v: &Value, rows: usize, cols: usize, at: &str) -> Result<CMatrix> {
    let list = v
        .as_array()
        .ok_or_else(|| Error::input(format!("{at}: expected a list of rows")))?;
    if list.len() != rows {
        return Err(Error::input(format!("{at}: has {} rows, expected {rows}", list.len())));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (i, row) in list.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::input(format!("{at}[{i}]: expected a row of [re, im] pairs")))?;
        if row.len() != cols {
            return Err(Error::input(format!(
                "{at}[{i}]: has {} entries, expected {cols}",
                row.len()
            )));
        }
        for (j, z) in row.iter().enumerate() {
            m[(i, j)] = entry(z, &format!("{at}[{i}][{j}]"))?;
        }
    }
    Ok(m)
}

fn to_value(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

impl ChannelSpecFile {
    pub fn from_channel(n: &Channel, label: Option<String>) -> Self {
        ChannelSpecFile {
            dim_in: n.dim_in(),
            dim_out: n.dim_out(),
            kraus: n.kraus().iter().map(to_value).collect(),
            label,
        }
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| syntax(source, e))
    }

    pub fn to_channel(&self) -> Result<Channel> {
        if self.dim_in == 0 || self.dim_out == 0 {
            return Err(Error::input("dim_in and dim_out must be positive"));
        }
        if self.kraus.is_empty() {
            return Err(Error::input("kraus: the list is empty"));
        }
        let ops = self
            .kraus
            .iter()
            .enumerate()
            .map(|(i, k)| matrix(k, self.dim_out, self.dim_in, &format!("kraus[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        Channel::from_kraus(ops).map_err(|e| match e {
            Error::Input(msg) => Error::input(format!("kraus: {msg}")),
            other => Error::input(format!("kraus: {other}")),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain JSON values serialize")
    }
}

impl BathSpecFile {
    pub fn from_context(ctx: &ThermalContext) -> Self {
        BathSpecFile {
            beta: ctx.beta(),
            hamiltonian: to_value(ctx.hamiltonian().matrix()),
        }
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| syntax(source, e))
    }

    pub fn to_context(&self) -> Result<ThermalContext> {
        let rows = self
            .hamiltonian
            .as_array()
            .map(Vec::len)
            .ok_or_else(|| Error::input("hamiltonian: expected a list of rows"))?;
        let h = matrix(&self.hamiltonian, rows, rows, "hamiltonian")?;
        let h = Hermitian::new(h).map_err(|e| Error::input(format!("hamiltonian: {e}")))?;
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::input(format!(
                "beta: must be positive and finite, got {}",
                self.beta
            )));
        }
        ThermalContext::new(h, self.beta).map_err(|e| Error::input(format!("bath: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain JSON values serialize")
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

pub fn load_channel(path: &Path) -> Result<Channel> {
    let text = read(path)?;
    let source = path.display().to_string();
    ChannelSpecFile::parse(&text, &source)?
        .to_channel()
        .map_err(|e| Error::input(format!("{source}: {}", strip(&e))))
}

pub fn load_bath(path: &Path) -> Result<ThermalContext> {
    let text = read(path)?;
    let source = path.display().to_string();
    BathSpecFile::parse(&text, &source)?
        .to_context()
        .map_err(|e| Error::input(format!("{source}: {}", strip(&e))))
}

fn strip(e: &Error) -> String {
    match e {
        Error::Input(msg) => msg.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_round_trip_is_bit_identical() {
        let n = Channel::random_seeded(2, 3, 3, 17);
        let text = ChannelSpecFile::from_channel(&n, Some("r".into())).to_json();
        let back = ChannelSpecFile::parse(&text, "mem").unwrap().to_channel().unwrap();
        for (a, b) in n.kraus().iter().zip(back.kraus()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn malformed_kraus_entry_is_named() {
        let text = r#"{"dim_in": 1, "dim_out": 1, "kraus": [[[[1, 0]]], [[[0, "x"]]]]}"#;
        let e = ChannelSpecFile::parse(text, "mem").unwrap().to_channel().unwrap_err();
        assert!(e.to_string().contains("kraus[1][0][0]"), "{e}");
    }

    #[test]
    fn syntax_errors_carry_a_position() {
        let e = BathSpecFile::parse("{\n  \"beta\": 1.0,\n  \"hamiltonian\": [[[0, 0]]\n", "bath.json").unwrap_err();
        assert!(e.to_string().contains("bath.json:"), "{e}");
    }

    #[test]
    fn non_hermitian_hamiltonian_is_rejected() {
        let text = r#"{"beta": 1.0, "hamiltonian": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]}"#;
        let e = BathSpecFile::parse(text, "mem").unwrap().to_context().unwrap_err();
        assert!(e.to_string().contains("hamiltonian"), "{e}");
    }
}
