//! File formats: CSV for 1-D data (wavefunctions, densities, orbits,
//! trajectories), JSON sidecar plus little-endian f64 binary for 3-D
//! fields, and a minimal dependency-free SVG line-plot emitter.

use num_complex::Complex64;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::NumericError;
use crate::grid::{Field3D, Grid1D, Grid3D, WaveFunction1D};
use crate::oracle::PhasePoint;
use crate::params::ModelParams;

fn io_err(e: std::io::Error) -> NumericError {
    NumericError::InvalidParams(format!("io error: {e}"))
}

fn params_header(params: &ModelParams) -> String {
    format!(
        "# params: d={} e={} h2={} h4={} m={} a={}",
        params.d, params.e, params.h2, params.h4, params.m, params.a
    )
}

/// `y,re,im` CSV with a `# params: …` header line.
pub fn write_wavefunction_csv(
    path: &Path,
    psi: &WaveFunction1D,
    params: &ModelParams,
) -> Result<(), NumericError> {
    let mut s = String::new();
    s.push_str(&params_header(params));
    s.push('\n');
    s.push_str("y,re,im\n");
    for (j, y) in psi.grid.points().enumerate() {
        let v = psi.values[j];
        writeln!(s, "{y:.17e},{:.17e},{:.17e}", v.re, v.im).unwrap();
    }
    fs::write(path, s).map_err(io_err)
}

/// Reads a `y,re,im` CSV (comment lines starting with `#` and a header
/// row are skipped) back into a wavefunction on the uniform grid it
/// encodes.
pub fn read_wavefunction_csv(path: &Path) -> Result<WaveFunction1D, NumericError> {
    let text = fs::read_to_string(path).map_err(io_err)?;
    let mut ys = Vec::new();
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('y') {
            continue;
        }
        let mut cols = line.split(',');
        let mut next = |name: &str| -> Result<f64, NumericError> {
            cols.next()
                .ok_or_else(|| NumericError::InvalidParams(format!("missing column {name}")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| NumericError::InvalidParams(format!("bad {name}: {e}")))
        };
        ys.push(next("y")?);
        values.push(Complex64::new(next("re")?, next("im")?));
    }
    if ys.len() < 2 {
        return Err(NumericError::GridTooSmall(
            "need at least two CSV rows".into(),
        ));
    }
    let step = ys[1] - ys[0];
    for w in ys.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1.0) {
            return Err(NumericError::InvalidParams(
                "CSV grid is not uniform".into(),
            ));
        }
    }
    Ok(WaveFunction1D {
        grid: Grid1D {
            y0: ys[0],
            step,
            n: ys.len(),
        },
        values,
    })
}

/// Density nodes as `s,re,im` CSV.
pub fn write_density_csv(
    path: &Path,
    density: &crate::dynamics::SpectralDensity,
) -> Result<(), NumericError> {
    let mut s = String::from("s,re,im\n");
    for (node, w) in density.nodes.iter().zip(&density.weights) {
        writeln!(s, "{node:.17e},{:.17e},{:.17e}", w.re, w.im).unwrap();
    }
    fs::write(path, s).map_err(io_err)
}

/// Reads `s,re,im` density CSV.
pub fn read_density_csv(path: &Path) -> Result<crate::dynamics::SpectralDensity, NumericError> {
    let text = fs::read_to_string(path).map_err(io_err)?;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('s') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(NumericError::InvalidParams(format!(
                "density row needs 3 columns, got {}",
                cols.len()
            )));
        }
        let parse = |c: &str| {
            c.trim()
                .parse::<f64>()
                .map_err(|e| NumericError::InvalidParams(format!("bad density value: {e}")))
        };
        nodes.push(parse(cols[0])?);
        weights.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
    }
    crate::dynamics::SpectralDensity::new(nodes, weights)
}

/// JSON sidecar describing a [`Field3D`] binary blob.
#[derive(serde::Serialize, serde::Deserialize)]
pub struct FieldSidecar {
    pub axes: [String; 3],
    pub counts: [usize; 3],
    pub origins: [f64; 3],
    pub steps: [f64; 3],
    pub params: ModelParams,
    /// layout of the companion `.f64` file
    pub layout: String,
}

/// Writes `base.json` (sidecar) and `base.f64`: flat little-endian
/// IEEE-754 float64 interleaved (re, im), x3 fastest, then x1, then x2.
pub fn write_field_binary(
    base: &Path,
    field: &Field3D,
    params: &ModelParams,
) -> Result<(), NumericError> {
    let g = field.grid;
    let sidecar = FieldSidecar {
        axes: ["x1".into(), "x2".into(), "x3".into()],
        counts: g.n,
        origins: g.origin,
        steps: g.step,
        params: params.clone(),
        layout: "interleaved re,im float64 LE; x3 fastest, then x1, then x2".into(),
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| NumericError::InvalidParams(format!("sidecar: {e}")))?;
    fs::write(base.with_extension("json"), json).map_err(io_err)?;
    let file = fs::File::create(base.with_extension("f64")).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    for i2 in 0..g.n[1] {
        for i1 in 0..g.n[0] {
            for i3 in 0..g.n[2] {
                let v = field.at(i1, i2, i3);
                w.write_all(&v.re.to_le_bytes()).map_err(io_err)?;
                w.write_all(&v.im.to_le_bytes()).map_err(io_err)?;
            }
        }
    }
    w.flush().map_err(io_err)
}

/// Reads a field written by [`write_field_binary`].
pub fn read_field_binary(base: &Path) -> Result<(Field3D, ModelParams), NumericError> {
    let json = fs::read_to_string(base.with_extension("json")).map_err(io_err)?;
    let sidecar: FieldSidecar = serde_json::from_str(&json)
        .map_err(|e| NumericError::InvalidParams(format!("sidecar: {e}")))?;
    let grid = Grid3D {
        origin: sidecar.origins,
        step: sidecar.steps,
        n: sidecar.counts,
    };
    let bytes = fs::read(base.with_extension("f64")).map_err(io_err)?;
    if bytes.len() != grid.len() * 16 {
        return Err(NumericError::InvalidParams(format!(
            "binary size {} does not match grid ({} nodes)",
            bytes.len(),
            grid.len()
        )));
    }
    let mut field = Field3D::zeros(grid);
    let mut chunk = bytes.chunks_exact(16);
    for i2 in 0..grid.n[1] {
        for i1 in 0..grid.n[0] {
            for i3 in 0..grid.n[2] {
                let b = chunk.next().unwrap();
                let re = f64::from_le_bytes(b[0..8].try_into().unwrap());
                let im = f64::from_le_bytes(b[8..16].try_into().unwrap());
                field.values[grid.index(i1, i2, i3)] = Complex64::new(re, im);
            }
        }
    }
    Ok((field, sidecar.params))
}

/// Pure-CSV alternative for small grids: `x1,x2,x3,re,im` rows.
pub fn write_field_csv(
    path: &Path,
    field: &Field3D,
    params: &ModelParams,
) -> Result<(), NumericError> {
    let g = field.grid;
    let mut s = String::new();
    s.push_str(&params_header(params));
    s.push('\n');
    s.push_str("x1,x2,x3,re,im\n");
    for i2 in 0..g.n[1] {
        for i1 in 0..g.n[0] {
            for i3 in 0..g.n[2] {
                let v = field.at(i1, i2, i3);
                writeln!(
                    s,
                    "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                    g.coord(0, i1),
                    g.coord(1, i2),
                    g.coord(2, i3),
                    v.re,
                    v.im
                )
                .unwrap();
            }
        }
    }
    fs::write(path, s).map_err(io_err)
}

/// Phase-space orbit as `t,q,p` CSV.
pub fn write_orbit_csv(path: &Path, orbit: &[PhasePoint]) -> Result<(), NumericError> {
    let mut s = String::from("t,q,p\n");
    for pt in orbit {
        writeln!(s, "{:.17e},{:.17e},{:.17e}", pt.t, pt.q, pt.p).unwrap();
    }
    fs::write(path, s).map_err(io_err)
}

/// Propagation trajectory as `t,norm,energy` CSV.
pub fn write_trajectory_csv(
    path: &Path,
    rows: &[(f64, f64, f64)],
) -> Result<(), NumericError> {
    let mut s = String::from("t,norm,energy\n");
    for (t, norm, energy) in rows {
        writeln!(s, "{t:.17e},{norm:.17e},{energy:.17e}").unwrap();
    }
    fs::write(path, s).map_err(io_err)
}

/// Generic two-column figure data: `x,y` per series column.
pub fn write_columns_csv(
    path: &Path,
    header: &[&str],
    columns: &[Vec<f64>],
) -> Result<(), NumericError> {
    if columns.is_empty() || columns.iter().any(|c| c.len() != columns[0].len()) {
        return Err(NumericError::InvalidParams(
            "columns must be non-empty and equal length".into(),
        ));
    }
    if header.len() != columns.len() {
        return Err(NumericError::InvalidParams(
            "header/column count mismatch".into(),
        ));
    }
    let mut s = header.join(",");
    s.push('\n');
    for row in 0..columns[0].len() {
        let line: Vec<String> = columns.iter().map(|c| format!("{:.17e}", c[row])).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    fs::write(path, s).map_err(io_err)
}

/// Minimal SVG line plot: one polyline per series over a shared x array.
/// No external plotting dependency; axes are a plain border box.
pub fn write_svg_lines(
    path: &Path,
    x: &[f64],
    series: &[(&str, &[f64])],
) -> Result<(), NumericError> {
    if x.len() < 2 || series.iter().any(|(_, ys)| ys.len() != x.len()) {
        return Err(NumericError::InvalidParams(
            "svg series must match the x array and have >= 2 points".into(),
        ));
    }
    let (w, h, pad) = (640.0, 400.0, 40.0);
    let xmin = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let xmax = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for (_, ys) in series {
        for &v in *ys {
            ymin = ymin.min(v);
            ymax = ymax.max(v);
        }
    }
    if !(xmin.is_finite() && ymin.is_finite()) {
        return Err(NumericError::InvalidParams("non-finite svg data".into()));
    }
    let (xspan, yspan) = ((xmax - xmin).max(1e-300), (ymax - ymin).max(1e-300));
    let sx = |v: f64| pad + (v - xmin) / xspan * (w - 2.0 * pad);
    let sy = |v: f64| h - pad - (v - ymin) / yspan * (h - 2.0 * pad);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];
    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    )
    .unwrap();
    writeln!(
        svg,
        "<rect x=\"{pad}\" y=\"{pad}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>",
        w - 2.0 * pad,
        h - 2.0 * pad
    )
    .unwrap();
    for (k, (name, ys)) in series.iter().enumerate() {
        let pts: Vec<String> = x
            .iter()
            .zip(*ys)
            .map(|(&xv, &yv)| format!("{:.2},{:.2}", sx(xv), sy(yv)))
            .collect();
        writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"><title>{}</title></polyline>",
            colors[k % colors.len()],
            pts.join(" "),
            name
        )
        .unwrap();
    }
    for (k, (name, _)) in series.iter().enumerate() {
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{}\">{}</text>",
            pad + 6.0,
            pad + 16.0 + 14.0 * k as f64,
            colors[k % colors.len()],
            name
        )
        .unwrap();
    }
    writeln!(svg, "</svg>").unwrap();
    fs::write(path, svg).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SpectralDensity;

    fn params() -> ModelParams {
        ModelParams {
            d: 0.3,
            e: 1.0,
            h2: 0.1,
            h4: 0.25,
            m: 1.0,
            a: 0.0,
        }
    }

    #[test]
    fn wavefunction_csv_roundtrip() {
        let dir = std::env::temp_dir().join("geomcst_io_wf");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("psi.csv");
        let grid = Grid1D::symmetric(2.0, 11);
        let psi = WaveFunction1D::from_fn(grid, |y| Complex64::new(y.cos(), y.sin()));
        write_wavefunction_csv(&path, &psi, &params()).unwrap();
        let back = read_wavefunction_csv(&path).unwrap();
        assert_eq!(back.grid.n, grid.n);
        assert!((back.grid.y0 - grid.y0).abs() < 1e-15);
        for (a, b) in back.values.iter().zip(&psi.values) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn field_binary_roundtrip_is_exact() {
        let dir = std::env::temp_dir().join("geomcst_io_field");
        fs::create_dir_all(&dir).unwrap();
        let base = dir.join("field");
        let grid = Grid3D::new([-1.0; 3], [0.25; 3], [5, 4, 3]);
        let mut field = Field3D::zeros(grid);
        for (k, v) in field.values.iter_mut().enumerate() {
            *v = Complex64::new(k as f64 * 0.37, -(k as f64) * 0.11);
        }
        write_field_binary(&base, &field, &params()).unwrap();
        let (back, p) = read_field_binary(&base).unwrap();
        assert_eq!(back.grid.n, grid.n);
        assert_eq!(back.values, field.values);
        assert_eq!(p.h4, params().h4);
    }

    #[test]
    fn density_csv_roundtrip() {
        let dir = std::env::temp_dir().join("geomcst_io_density");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("density.csv");
        let d = SpectralDensity::new(
            vec![-0.5, 0.25, 1.0],
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, -0.5),
                Complex64::new(0.3, 0.4),
            ],
        )
        .unwrap();
        write_density_csv(&path, &d).unwrap();
        let back = read_density_csv(&path).unwrap();
        assert_eq!(back.nodes, d.nodes);
        assert_eq!(back.weights, d.weights);
    }

    #[test]
    fn svg_emitter_produces_polylines() {
        let dir = std::env::temp_dir().join("geomcst_io_svg");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("plot.svg");
        let x: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let y1: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let y2: Vec<f64> = x.iter().map(|v| v.cos()).collect();
        write_svg_lines(&path, &x, &[("sin", &y1), ("cos", &y2)]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("<polyline").count(), 2);
        assert!(text.starts_with("<svg"));
    }
}
