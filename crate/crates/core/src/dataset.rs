//! Observation matrices and their headerless CSV encoding.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{invalid, Error, Result};

/// `n x d` matrix of finite observations; column `j` holds variable `X_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    data: Array2<f64>,
}

impl Dataset {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(invalid(format!(
                "dataset must be non-empty, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if let Some(((r, c), v)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(invalid(format!("non-finite value {v} at row {r}, column {c}")));
        }
        Ok(Self { data })
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn d(&self) -> usize {
        self.data.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.data.column(j)
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.data
    }

    pub fn select_columns(&self, cols: &[usize]) -> Dataset {
        Dataset {
            data: self.data.select(Axis(1), cols),
        }
    }

    pub fn column_means(&self) -> Array1<f64> {
        self.data.mean_axis(Axis(0)).expect("non-empty dataset")
    }

    /// Headerless CSV, one row per sample, each value printed as `%.17g`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut line = String::new();
        for row in self.data.rows() {
            line.clear();
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format_g17(*v));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Parses a numeric CSV. Rows and columns in errors are 1-based and count
    /// the header line when `has_header` is set.
    pub fn read_csv<R: Read>(r: R, has_header: bool) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(r);
        let mut values = Vec::new();
        let mut width = None;
        let offset = usize::from(has_header) + 1;
        let mut rows = 0;
        for (ri, rec) in reader.records().enumerate() {
            let rec = rec?;
            let row = ri + offset;
            if rec.len() == 1 && rec[0].is_empty() {
                continue;
            }
            match width {
                None => width = Some(rec.len()),
                Some(w) if w != rec.len() => {
                    return Err(Error::Parse {
                        row,
                        col: rec.len().min(w) + 1,
                        msg: format!("expected {w} fields, found {}", rec.len()),
                    })
                }
                _ => {}
            }
            for (ci, field) in rec.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    row,
                    col: ci + 1,
                    msg: format!("cannot parse {field:?} as a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row,
                        col: ci + 1,
                        msg: format!("non-finite value {field:?}"),
                    });
                }
                values.push(v);
            }
            rows += 1;
        }
        let d = width.ok_or_else(|| Error::Format("CSV contains no data rows".into()))?;
        let data = Array2::from_shape_vec((rows, d), values)
            .map_err(|e| Error::Format(e.to_string()))?;
        Dataset::new(data)
    }

    pub fn read_csv_path(path: impl AsRef<Path>, has_header: bool) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f), has_header)
    }
}

/// Formats like C's `printf("%.17g", v)`.
pub fn format_g17(v: f64) -> String {
    const PREC: i32 = 17;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (PREC - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= PREC {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let fixed = format!("{:.*}", (PREC - 1 - exp) as usize, v);
        strip_zeros(&fixed).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
