//! Plain-text dense arrays:
//!
//! ```text
//! # comment
//! dims 2 3
//! 0 1 4.5
//! label 0 1 CNN:general
//! ```
//!
//! One `index... value` line per non-zero entry; unlisted entries are zero.
//! `label <mode> <index> <name>` names a slice along a mode.

use nalgebra::DMatrix;

use super::{FactorError, Tensor3};

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayText {
    pub dims: Vec<usize>,
    /// Row-major values.
    pub values: Vec<f64>,
    /// One label per index along each mode; defaults to the index.
    pub labels: Vec<Vec<String>>,
}

impl ArrayText {
    pub fn from_matrix(m: &DMatrix<f64>, labels: [Vec<String>; 2]) -> Self {
        let (r, c) = m.shape();
        ArrayText {
            dims: vec![r, c],
            values: (0..r * c).map(|i| m[(i / c, i % c)]).collect(),
            labels: labels.into(),
        }
    }

    pub fn from_tensor(t: &Tensor3, labels: [Vec<String>; 3]) -> Self {
        ArrayText {
            dims: t.dims().to_vec(),
            values: t.data().to_vec(),
            labels: labels.into(),
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>, FactorError> {
        if self.dims.len() != 2 {
            return Err(FactorError::Parse {
                line: 0,
                reason: format!("expected a matrix, found {} modes", self.dims.len()),
            });
        }
        let c = self.dims[1];
        Ok(DMatrix::from_fn(self.dims[0], c, |i, j| self.values[i * c + j]))
    }

    pub fn to_tensor(&self) -> Result<Tensor3, FactorError> {
        if self.dims.len() != 3 {
            return Err(FactorError::Parse {
                line: 0,
                reason: format!("expected a 3-way tensor, found {} modes", self.dims.len()),
            });
        }
        let [_, b, c] = [self.dims[0], self.dims[1], self.dims[2]];
        Ok(Tensor3::from_fn([self.dims[0], b, c], |i, j, k| {
            self.values[(i * b + j) * c + k]
        }))
    }
}

pub fn parse_array(text: &str) -> Result<ArrayText, FactorError> {
    let mut out: Option<ArrayText> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let err = |reason: String| FactorError::Parse { line, reason };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match (fields[0], out.as_mut()) {
            ("dims", None) => {
                let dims = fields[1..]
                    .iter()
                    .map(|f| f.parse::<usize>().map_err(|e| err(format!("bad dimension `{f}`: {e}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                if dims.is_empty() || dims.contains(&0) {
                    return Err(err("dimensions must be positive".into()));
                }
                let size = dims.iter().product();
                out = Some(ArrayText {
                    labels: dims.iter().map(|&d| (0..d).map(|i| i.to_string()).collect()).collect(),
                    dims,
                    values: vec![0.0; size],
                });
            }
            ("dims", Some(_)) => return Err(err("repeated `dims` header".into())),
            (_, None) => return Err(err("missing `dims` header".into())),
            ("label", Some(a)) => {
                if fields.len() < 4 {
                    return Err(err("expected `label <mode> <index> <name>`".into()));
                }
                let mode: usize = fields[1].parse().map_err(|_| err(format!("bad mode `{}`", fields[1])))?;
                let idx: usize = fields[2].parse().map_err(|_| err(format!("bad index `{}`", fields[2])))?;
                if mode >= a.dims.len() || idx >= a.dims[mode] {
                    return Err(err(format!("label ({mode}, {idx}) out of range")));
                }
                a.labels[mode][idx] = fields[3..].join(" ");
            }
            (_, Some(a)) => {
                if fields.len() != a.dims.len() + 1 {
                    return Err(err(format!("expected {} indices and a value", a.dims.len())));
                }
                let mut offset = 0;
                for (f, &d) in fields.iter().zip(&a.dims) {
                    let i: usize = f.parse().map_err(|_| err(format!("bad index `{f}`")))?;
                    if i >= d {
                        return Err(err(format!("index {i} out of range 0..{d}")));
                    }
                    offset = offset * d + i;
                }
                let v: f64 = fields[a.dims.len()]
                    .parse()
                    .map_err(|_| err(format!("bad value `{}`", fields[a.dims.len()])))?;
                if !v.is_finite() {
                    return Err(err("non-finite value".into()));
                }
                a.values[offset] = v;
            }
        }
    }
    out.ok_or(FactorError::Parse {
        line: 0,
        reason: "missing `dims` header".into(),
    })
}

pub fn write_array(a: &ArrayText) -> String {
    let mut s = format!(
        "dims {}\n",
        a.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ")
    );
    for (mode, labels) in a.labels.iter().enumerate() {
        for (i, l) in labels.iter().enumerate() {
            if *l != i.to_string() {
                s.push_str(&format!("label {mode} {i} {l}\n"));
            }
        }
    }
    for (offset, &v) in a.values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let mut idx = vec![0; a.dims.len()];
        let mut rest = offset;
        for m in (0..a.dims.len()).rev() {
            idx[m] = rest % a.dims[m];
            rest /= a.dims[m];
        }
        let idx: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        s.push_str(&format!("{} {v:?}\n", idx.join(" ")));
    }
    s
}
