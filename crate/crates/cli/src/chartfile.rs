//! Self-describing text format for chart data.
//!
//! ```text
//! format_version = 1
//! chart_id = stereo-log
//! nx = 256
//! ...
//! fields_present = f,n,u,H,xi
//! ---
//! x y f1 f2 f3 f4 n1 n2 n3 n4 u H xi_re xi_im
//! ```
//!
//! Body lines are row-major with `y` outer and `x` inner. Numbers are written
//! with 17 significant digits so that a write/read cycle is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use desitter_twistor::chart::{ChartGrid, Field, StencilOrder};
use desitter_twistor::lorentz::MinkowskiVector;
use desitter_twistor::surface::SurfaceData;
use nalgebra::Complex;

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;
const SEPARATOR: &str = "---";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    F,
    N,
    U,
    H,
    Xi,
}

impl FieldKind {
    const ALL: [FieldKind; 5] = [FieldKind::F, FieldKind::N, FieldKind::U, FieldKind::H, FieldKind::Xi];

    pub fn name(self) -> &'static str {
        match self {
            FieldKind::F => "f",
            FieldKind::N => "n",
            FieldKind::U => "u",
            FieldKind::H => "H",
            FieldKind::Xi => "xi",
        }
    }

    fn width(self) -> usize {
        match self {
            FieldKind::F | FieldKind::N => 4,
            FieldKind::U | FieldKind::H => 1,
            FieldKind::Xi => 2,
        }
    }

    fn columns(self) -> Vec<String> {
        match self {
            FieldKind::F => (1..=4).map(|k| format!("f{k}")).collect(),
            FieldKind::N => (1..=4).map(|k| format!("n{k}")).collect(),
            FieldKind::U => vec!["u".into()],
            FieldKind::H => vec!["H".into()],
            FieldKind::Xi => vec!["xi_re".into(), "xi_im".into()],
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartFile {
    pub grid: ChartGrid,
    pub euler_char: Option<i32>,
    pub f: Option<Field<MinkowskiVector>>,
    pub n: Option<Field<MinkowskiVector>>,
    pub u: Option<Field<f64>>,
    pub h: Option<Field<f64>>,
    pub xi: Option<Field<Complex<f64>>>,
}

fn number(v: f64) -> String {
    format!("{v:.16e}")
}

impl ChartFile {
    pub fn empty(grid: ChartGrid) -> Self {
        Self {
            grid,
            euler_char: None,
            f: None,
            n: None,
            u: None,
            h: None,
            xi: None,
        }
    }

    /// Immersion and invariants of `data`; missing parts stay absent.
    pub fn from_data(data: &SurfaceData) -> Self {
        Self {
            grid: data.grid().clone(),
            euler_char: data.euler_char,
            f: data.f.clone(),
            n: data.n.clone(),
            u: Some(data.u.clone()),
            h: Some(data.h.clone()),
            xi: Some(data.xi.clone()),
        }
    }

    /// Same data with derivatives taken at the given stencil order.
    pub fn with_stencil(self, stencil: StencilOrder) -> Self {
        let grid = self.grid.clone().with_stencil(stencil);
        fn re<T>(f: Option<Field<T>>, grid: &ChartGrid) -> Option<Field<T>> {
            f.map(|f| f.regrid(grid.clone()).expect("same node count"))
        }
        Self {
            f: re(self.f, &grid),
            n: re(self.n, &grid),
            u: re(self.u, &grid),
            h: re(self.h, &grid),
            xi: re(self.xi, &grid),
            euler_char: self.euler_char,
            grid,
        }
    }

    pub fn fields_present(&self) -> Vec<FieldKind> {
        FieldKind::ALL
            .into_iter()
            .filter(|k| match k {
                FieldKind::F => self.f.is_some(),
                FieldKind::N => self.n.is_some(),
                FieldKind::U => self.u.is_some(),
                FieldKind::H => self.h.is_some(),
                FieldKind::Xi => self.xi.is_some(),
            })
            .collect()
    }

    /// The invariants as [`SurfaceData`]; requires `u`, `H` and `ξ`.
    pub fn to_data(&self) -> Result<SurfaceData, CliError> {
        let (Some(u), Some(h), Some(xi)) = (&self.u, &self.h, &self.xi) else {
            return Err(CliError::MissingField("u, H, xi"));
        };
        let mut data = SurfaceData::from_invariants(u.clone(), h.clone(), xi.clone())?;
        data.f = self.f.clone();
        data.n = self.n.clone();
        data.euler_char = self.euler_char;
        Ok(data)
    }

    pub fn render(&self) -> String {
        let g = &self.grid;
        let present = self.fields_present();
        let mut out = String::new();
        let names: Vec<&str> = present.iter().map(|k| k.name()).collect();
        let _ = writeln!(out, "format_version = {FORMAT_VERSION}");
        let _ = writeln!(out, "chart_id = {}", g.chart_id);
        let _ = writeln!(out, "nx = {}", g.nx);
        let _ = writeln!(out, "ny = {}", g.ny);
        let _ = writeln!(out, "hx = {}", number(g.hx));
        let _ = writeln!(out, "hy = {}", number(g.hy));
        let _ = writeln!(out, "x0 = {}", number(g.x0));
        let _ = writeln!(out, "y0 = {}", number(g.y0));
        let _ = writeln!(out, "periodic_x = {}", g.periodic_x);
        let _ = writeln!(out, "periodic_y = {}", g.periodic_y);
        let _ = writeln!(out, "fields_present = {}", names.join(","));
        if let Some(chi) = self.euler_char {
            let _ = writeln!(out, "euler_char = {chi}");
        }
        if g.stencil == StencilOrder::Fourth {
            let _ = writeln!(out, "stencil = fourth");
        }
        let _ = writeln!(out, "{SEPARATOR}");
        let mut cols = vec!["x".to_string(), "y".to_string()];
        for k in &present {
            cols.extend(k.columns());
        }
        let _ = writeln!(out, "{}", cols.join(" "));
        let mut row: Vec<String> = Vec::with_capacity(cols.len());
        for k in 0..g.len() {
            row.clear();
            let (x, y) = g.point(k);
            row.push(number(x));
            row.push(number(y));
            for kind in &present {
                match kind {
                    FieldKind::F => row.extend(self.f.as_ref().unwrap().at(k).iter().map(|v| number(*v))),
                    FieldKind::N => row.extend(self.n.as_ref().unwrap().at(k).iter().map(|v| number(*v))),
                    FieldKind::U => row.push(number(*self.u.as_ref().unwrap().at(k))),
                    FieldKind::H => row.push(number(*self.h.as_ref().unwrap().at(k))),
                    FieldKind::Xi => {
                        let z = self.xi.as_ref().unwrap().at(k);
                        row.push(number(z.re));
                        row.push(number(z.im));
                    }
                }
            }
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.render()).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Format { line, msg, .. } => CliError::Format {
                path: path.display().to_string(),
                line,
                msg,
            },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = |line: usize, msg: String| CliError::Format {
            path: "<input>".into(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut header = std::collections::BTreeMap::new();
        let mut saw_separator = false;
        for (no, line) in lines.by_ref() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == SEPARATOR {
                saw_separator = true;
                break;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(bad(no, format!("expected `key = value`, got {line:?}")));
            };
            header.insert(k.trim().to_string(), (no, v.trim().to_string()));
        }
        if !saw_separator {
            return Err(bad(0, "missing `---` separator".into()));
        }
        let get = |key: &str| -> Result<(usize, String), CliError> {
            header
                .get(key)
                .cloned()
                .ok_or_else(|| bad(0, format!("missing header key {key}")))
        };
        fn value<T: std::str::FromStr>(
            (no, v): (usize, String),
            key: &str,
            bad: &dyn Fn(usize, String) -> CliError,
        ) -> Result<T, CliError> {
            v.parse().map_err(|_| bad(no, format!("bad value for {key}: {v:?}")))
        }
        let version: u32 = value(get("format_version")?, "format_version", &bad)?;
        if version != FORMAT_VERSION {
            return Err(bad(0, format!("unsupported format_version {version}")));
        }
        let chart_id = get("chart_id")?.1;
        let nx: usize = value(get("nx")?, "nx", &bad)?;
        let ny: usize = value(get("ny")?, "ny", &bad)?;
        let hx: f64 = value(get("hx")?, "hx", &bad)?;
        let hy: f64 = value(get("hy")?, "hy", &bad)?;
        let x0: f64 = value(get("x0")?, "x0", &bad)?;
        let y0: f64 = value(get("y0")?, "y0", &bad)?;
        let px: bool = value(get("periodic_x")?, "periodic_x", &bad)?;
        let py: bool = value(get("periodic_y")?, "periodic_y", &bad)?;
        let euler_char = match header.get("euler_char") {
            Some(e) => Some(value(e.clone(), "euler_char", &bad)?),
            None => None,
        };
        let stencil = match header.get("stencil") {
            None => StencilOrder::Second,
            Some((_, v)) if v == "second" => StencilOrder::Second,
            Some((_, v)) if v == "fourth" => StencilOrder::Fourth,
            Some((no, v)) => return Err(bad(*no, format!("unknown stencil {v:?}"))),
        };
        let (fno, fields) = get("fields_present")?;
        let mut present = Vec::new();
        for name in fields.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let kind = FieldKind::parse(name).ok_or_else(|| bad(fno, format!("unknown field {name:?}")))?;
            if present.contains(&kind) {
                return Err(bad(fno, format!("duplicate field {name:?}")));
            }
            present.push(kind);
        }
        let grid = ChartGrid::new(nx, ny, hx, hy, x0, y0, px, py)
            .map_err(|e| bad(0, e.to_string()))?
            .with_chart_id(&chart_id)
            .with_stencil(stencil);

        let mut expected_cols = vec!["x".to_string(), "y".to_string()];
        for k in &present {
            expected_cols.extend(k.columns());
        }
        let (cno, cols) = lines
            .by_ref()
            .find(|(_, l)| !l.trim().is_empty())
            .ok_or_else(|| bad(0, "missing column header".into()))?;
        let got: Vec<&str> = cols.split_whitespace().collect();
        if got != expected_cols {
            return Err(bad(
                cno,
                format!("columns {got:?} do not match fields_present {expected_cols:?}"),
            ));
        }
        let width = expected_cols.len();
        let mut data = vec![0.0; grid.len() * width];
        let mut count = 0;
        for (no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            if count == grid.len() {
                return Err(bad(no, format!("more than nx·ny = {} rows", grid.len())));
            }
            let row = &mut data[count * width..(count + 1) * width];
            let mut filled = 0;
            for (slot, tok) in row.iter_mut().zip(line.split_whitespace()) {
                let v: f64 = tok.parse().map_err(|_| bad(no, format!("not a number: {tok:?}")))?;
                if !v.is_finite() {
                    return Err(bad(no, format!("non-finite value {tok:?}")));
                }
                *slot = v;
                filled += 1;
            }
            if filled != width || line.split_whitespace().count() != width {
                return Err(bad(no, format!("expected {width} columns")));
            }
            let (x, y) = grid.point(count);
            let tol = 1e-9 * (1.0 + x.abs().max(y.abs()));
            if (row[0] - x).abs() > tol || (row[1] - y).abs() > tol {
                return Err(bad(
                    no,
                    format!("node ({}, {}) does not match the grid at ({x}, {y})", row[0], row[1]),
                ));
            }
            count += 1;
        }
        if count != grid.len() {
            return Err(bad(0, format!("expected {} rows, found {count}", grid.len())));
        }

        let mut file = Self::empty(grid.clone());
        file.euler_char = euler_char;
        let mut offset = 2;
        for kind in present {
            let col = |c: usize| -> Vec<f64> { (0..grid.len()).map(|k| data[k * width + offset + c]).collect() };
            let wrap = |e: desitter_twistor::Error| bad(0, e.to_string());
            match kind {
                FieldKind::F | FieldKind::N => {
                    let cs: Vec<Vec<f64>> = (0..4).map(col).collect();
                    let vals = (0..grid.len())
                        .map(|k| MinkowskiVector::new(cs[0][k], cs[1][k], cs[2][k], cs[3][k]))
                        .collect();
                    let field = Field::new(grid.clone(), vals).map_err(wrap)?;
                    if kind == FieldKind::F {
                        file.f = Some(field);
                    } else {
                        file.n = Some(field);
                    }
                }
                FieldKind::U => file.u = Some(Field::new(grid.clone(), col(0)).map_err(wrap)?),
                FieldKind::H => file.h = Some(Field::new(grid.clone(), col(0)).map_err(wrap)?),
                FieldKind::Xi => {
                    let (re, im) = (col(0), col(1));
                    let vals = re.into_iter().zip(im).map(|(a, b)| Complex::new(a, b)).collect();
                    file.xi = Some(Field::new(grid.clone(), vals).map_err(wrap)?);
                }
            }
            offset += kind.width();
        }
        Ok(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ChartFile {
        let g = ChartGrid::new(8, 9, 0.1, 1.0 / 3.0, -0.35, 0.1, true, false)
            .unwrap()
            .with_chart_id("cylinder");
        let mut c = ChartFile::empty(g.clone());
        c.f = Some(Field::from_fn(g.clone(), |x, y| {
            MinkowskiVector::new(x.sin(), y / 7.0, 1e-300, -x * y)
        }));
        c.xi = Some(Field::from_fn(g.clone(), |x, y| {
            Complex::new(x.exp(), -y * std::f64::consts::PI)
        }));
        c.u = Some(Field::from_fn(g, |x, y| (x + y).cos() / 3.0));
        c.euler_char = Some(0);
        c
    }

    #[test]
    fn roundtrip_is_exact() {
        let c = sample();
        let text = c.render();
        assert_eq!(ChartFile::parse(&text).unwrap(), c);
        assert!(text.contains("fields_present = f,u,xi"));
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let text = sample().render();
        let cases = [
            text.replace("fields_present = f,u,xi", "fields_present = f,u"),
            text.replace("nx = 8", "nx = 9"),
            text.replacen("---\n", "", 1),
            text.lines().take(30).collect::<Vec<_>>().join("\n"),
            text.replace("format_version = 1", "format_version = 7"),
            text.replacen(" 1.0000000000000000e-300", " NaN", 1),
            text.replace("fields_present = f,u,xi", "fields_present = f,u,xi,q"),
        ];
        for (i, t) in cases.iter().enumerate() {
            assert!(matches!(ChartFile::parse(t), Err(CliError::Format { .. })), "case {i}");
        }
    }

    #[test]
    fn data_requires_invariants() {
        let c = sample();
        assert!(matches!(c.to_data(), Err(CliError::MissingField(_))));
    }
}
