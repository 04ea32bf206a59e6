//! Plain-text file formats: point and moment CSV, binary masks as PGM or
//! 0/1 CSV, and kernel grids.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::moments::{MaskGrid, TruncatedMomentSequence};
use crate::polyalg::{enumerate_indices, MultiIndex};
use crate::postprocess::SupportEstimate;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { offset: line, message: message.into() }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_row(line: usize, l: &str) -> Result<Vec<f64>> {
    l.split(',').map(|f| f.trim().parse::<f64>().map_err(|e| parse_err(line, format!("{e}: {f:?}")))).collect()
}

fn is_header(l: &str) -> bool {
    l.split(',').any(|f| f.trim().parse::<f64>().is_err())
}

/// Points with an optional trailing weight column: `x1,...,xn[,w]`. A first
/// non-numeric line is taken as a header. Parse errors report line numbers.
pub fn parse_points_csv(text: &str, dim: usize) -> Result<(Vec<Vec<f64>>, Option<Vec<f64>>)> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut weighted = None;
    for (k, (line, l)) in data_lines(text).enumerate() {
        if k == 0 && is_header(l) {
            continue;
        }
        let mut row = parse_row(line, l)?;
        let has_w = match row.len() {
            n if n == dim => false,
            n if n == dim + 1 => true,
            n => return Err(parse_err(line, format!("expected {dim} or {} columns, found {n}", dim + 1))),
        };
        if *weighted.get_or_insert(has_w) != has_w {
            return Err(parse_err(line, "weight column present on some rows only"));
        }
        if has_w {
            weights.push(row.pop().expect("nonempty row"));
        }
        points.push(row);
    }
    if points.is_empty() {
        return Err(Error::EmptySupport);
    }
    Ok((points, weighted.unwrap_or(false).then_some(weights)))
}

pub fn read_points_csv(path: &Path, dim: usize) -> Result<(Vec<Vec<f64>>, Option<Vec<f64>>)> {
    parse_points_csv(&fs::read_to_string(path)?, dim)
}

/// Moments as `alpha_1,...,alpha_n,value` in graded-lex order. Values use
/// the shortest representation that parses back to the same `f64`.
pub fn moments_to_csv(y: &TruncatedMomentSequence) -> String {
    let mut out = String::new();
    let header: Vec<String> = (1..=y.dim()).map(|i| format!("alpha_{i}")).collect();
    let _ = writeln!(out, "{},value", header.join(","));
    for (a, v) in enumerate_indices(y.dim(), y.order()).iter().zip(y.values()) {
        let e: Vec<String> = a.exponents().iter().map(u32::to_string).collect();
        let _ = writeln!(out, "{},{v:e}", e.join(","));
    }
    out
}

pub fn write_moments_csv(path: &Path, y: &TruncatedMomentSequence) -> Result<()> {
    Ok(fs::write(path, moments_to_csv(y))?)
}

/// Inverse of [`moments_to_csv`]. Rows may come in any order but must
/// cover every index up to the largest degree present.
pub fn parse_moments_csv(text: &str) -> Result<TruncatedMomentSequence> {
    let mut entries: Vec<(MultiIndex, f64)> = Vec::new();
    let mut dim = None;
    for (k, (line, l)) in data_lines(text).enumerate() {
        if k == 0 && is_header(l) {
            continue;
        }
        let fields: Vec<&str> = l.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            return Err(parse_err(line, "need at least one exponent and a value"));
        }
        let n = fields.len() - 1;
        if *dim.get_or_insert(n) != n {
            return Err(parse_err(line, "inconsistent column count"));
        }
        let exps = fields[..n]
            .iter()
            .map(|f| f.parse::<u32>().map_err(|e| parse_err(line, format!("{e}: {f:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let v = fields[n].parse::<f64>().map_err(|e| parse_err(line, format!("{e}: {:?}", fields[n])))?;
        entries.push((MultiIndex::new(exps), v));
    }
    let dim = dim.ok_or_else(|| invalid("no moments in file"))?;
    let order = entries.iter().map(|(a, _)| a.degree()).max().unwrap_or(0);
    let map = entries.into_iter().collect();
    TruncatedMomentSequence::from_map(dim, order, &map)
}

pub fn read_moments_csv(path: &Path) -> Result<TruncatedMomentSequence> {
    parse_moments_csv(&fs::read_to_string(path)?)
}

/// Grayscale image in portable graymap form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major from the top row.
    pub pixels: Vec<u16>,
}

impl Pgm {
    /// Parses plain (`P2`) or binary (`P5`) graymaps.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let token = |pos: &mut usize| -> Result<String> {
            loop {
                while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                    *pos += 1;
                }
                if *pos < bytes.len() && bytes[*pos] == b'#' {
                    while *pos < bytes.len() && bytes[*pos] != b'\n' {
                        *pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = *pos;
            while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if start == *pos {
                return Err(Error::Parse { offset: start, message: "unexpected end of image".into() });
            }
            Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
        };
        let magic = token(&mut pos)?;
        let num = |pos: &mut usize| -> Result<usize> {
            let at = *pos;
            token(pos)?.parse::<usize>().map_err(|e| Error::Parse { offset: at, message: e.to_string() })
        };
        let width = num(&mut pos)?;
        let height = num(&mut pos)?;
        let maxval = num(&mut pos)?;
        if maxval == 0 || maxval > u16::MAX as usize {
            return Err(Error::Parse { offset: pos, message: format!("bad maxval {maxval}") });
        }
        let n = width * height;
        let pixels = match magic.as_str() {
            "P2" => (0..n).map(|_| num(&mut pos).map(|v| v as u16)).collect::<Result<Vec<_>>>()?,
            "P5" => {
                pos += 1;
                let wide = maxval > 255;
                let need = n * if wide { 2 } else { 1 };
                let data = bytes
                    .get(pos..pos + need)
                    .ok_or_else(|| Error::Parse { offset: pos, message: "truncated pixel data".into() })?;
                if wide {
                    data.chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
                } else {
                    data.iter().map(|&b| b as u16).collect()
                }
            }
            m => return Err(Error::Parse { offset: 0, message: format!("unsupported magic {m:?}") }),
        };
        if pixels.iter().any(|&p| p as usize > maxval) {
            return Err(invalid("pixel value exceeds maxval"));
        }
        Ok(Self { width, height, maxval: maxval as u16, pixels })
    }

    pub fn to_p2(&self) -> String {
        let mut out = format!("P2\n{} {}\n{}\n", self.width, self.height, self.maxval);
        for row in self.pixels.chunks(self.width.max(1)) {
            let r: Vec<String> = row.iter().map(u16::to_string).collect();
            out.push_str(&r.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn to_p5(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        for &p in &self.pixels {
            if self.maxval > 255 {
                out.extend_from_slice(&p.to_be_bytes());
            } else {
                out.push(p as u8);
            }
        }
        out
    }

    /// Mask of pixels brighter than `threshold * maxval`, or darker when
    /// `invert` is set, placed on `[origin, origin + extent]`.
    pub fn to_mask(&self, origin: [f64; 2], extent: [f64; 2], threshold: f64, invert: bool) -> Result<MaskGrid> {
        let cut = threshold * self.maxval as f64;
        let cells = self.pixels.iter().map(|&p| (p as f64 > cut) != invert).collect();
        MaskGrid::new(self.height, self.width, cells, origin, extent)
    }

    /// White active cells on black.
    pub fn from_mask(mask: &MaskGrid) -> Self {
        Self {
            width: mask.cols,
            height: mask.rows,
            maxval: 255,
            pixels: mask.cells.iter().map(|&c| if c { 255 } else { 0 }).collect(),
        }
    }
}

pub fn read_pgm(path: &Path) -> Result<Pgm> {
    Pgm::parse(&fs::read(path)?)
}

/// Mask from rows of `0`/`1` separated by commas; the first row is the top.
pub fn parse_mask_csv(text: &str, origin: [f64; 2], extent: [f64; 2]) -> Result<MaskGrid> {
    let mut cells = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, l) in data_lines(text) {
        let row = l
            .split(',')
            .map(|f| match f.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                o => Err(parse_err(line, format!("expected 0 or 1, found {o:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if *cols.get_or_insert(row.len()) != row.len() {
            return Err(parse_err(line, "ragged mask row"));
        }
        cells.extend(row);
        rows += 1;
    }
    let cols = cols.ok_or(Error::EmptySupport)?;
    MaskGrid::new(rows, cols, cells, origin, extent)
}

pub fn read_mask_csv(path: &Path, origin: [f64; 2], extent: [f64; 2]) -> Result<MaskGrid> {
    parse_mask_csv(&fs::read_to_string(path)?, origin, extent)
}

/// `x1,...,xn,kappa,label` with label 1 for inside.
pub fn support_to_csv(est: &SupportEstimate) -> String {
    let n = est.points.first().map_or(0, Vec::len);
    let mut out = String::new();
    let header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let _ = writeln!(out, "{},kappa,label", header.join(","));
    for ((x, k), inside) in est.points.iter().zip(&est.kappa).zip(&est.inside) {
        let xs: Vec<String> = x.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(out, "{},{k:e},{}", xs.join(","), u8::from(*inside));
    }
    out
}

/// Label image of a two-dimensional support estimate computed on a grid
/// with `counts = [nx, ny]` points ordered first-axis fastest. The top
/// image row holds the largest second coordinate.
pub fn support_to_pgm(est: &SupportEstimate, counts: [usize; 2]) -> Result<Pgm> {
    let [nx, ny] = counts;
    if nx * ny != est.inside.len() {
        return Err(Error::DimensionMismatch { expected: nx * ny, found: est.inside.len() });
    }
    let mut pixels = Vec::with_capacity(nx * ny);
    for row in 0..ny {
        let j = ny - 1 - row;
        pixels.extend((0..nx).map(|i| if est.inside[j * nx + i] { 255 } else { 0 }));
    }
    Ok(Pgm { width: nx, height: ny, maxval: 255, pixels })
}
