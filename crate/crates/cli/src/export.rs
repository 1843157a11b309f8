use std::fmt::Write as _;

use anyhow::{anyhow, bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wavekit::polytope::{ConvexCell, HalfSpace, Region};
use wavekit::ratgeom::{from_f64, parse_rat, Rat, RatVec};
use wavekit::verify::float::{FloatRegionFile, Tri, DEFAULT_TOLERANCE};
use wavekit::verify::DEFAULT_SEED;

use crate::commands::{emit, read};
use crate::{ExportArgs, Format};

const CSV_SAMPLES: usize = 5000;
const SVG_SIZE: f64 = 480.0;

pub fn run(args: &ExportArgs) -> Result<u8> {
    let text = read(&args.file)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let samples = args.samples.unwrap_or(CSV_SAMPLES);
    if value.get("float").is_some() {
        if args.format != Format::Csv {
            bail!("a float description only exports as csv");
        }
        let file: FloatRegionFile = serde_json::from_value(value)?;
        file.float.validate()?;
        emit(args.output.as_deref(), &float_csv(&file, samples, seed))?;
        return Ok(0);
    }
    let region = Region::from_json(&text)?;
    let out = match args.format {
        Format::Off => off(&region)?,
        Format::Svg => {
            let polygons = match (&args.slice, region.dim) {
                (None, 2) => region.cells.iter().enumerate().map(|(i, c)| (i, c.vertices().to_vec())).collect(),
                (Some(spec), 3) => {
                    let (axis, value) = parse_slice(spec, 3)?;
                    slice(&region, axis, &value)?
                }
                (None, 3) => bail!("a 3D region needs --slice xi=c for svg output"),
                (Some(_), 2) => bail!("--slice applies to 3D regions"),
                (_, n) => bail!("svg export supports dimension 2, or 3 with a slice; got {n}"),
            };
            if polygons.is_empty() {
                eprintln!("warning: the slice plane misses the region; the drawing is empty");
            }
            svg(&polygons)
        }
        Format::Csv => region_csv(&region, samples, seed),
    };
    emit(args.output.as_deref(), &out)?;
    Ok(0)
}

/// `%.17g`.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..17).contains(&exp) {
        let s = format!("{x:.*}", (16 - exp) as usize);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{exp}")
    }
}

/// Vertices of a planar polygon, counter-clockwise about `normal`.
fn around(points: &[Vec<f64>], normal: Option<&[f64]>) -> Vec<usize> {
    let n = points.len() as f64;
    let dim = points[0].len();
    let c: Vec<f64> = (0..dim).map(|i| points.iter().map(|p| p[i]).sum::<f64>() / n).collect();
    let (u, v) = match normal {
        None => (vec![1.0, 0.0], vec![0.0, 1.0]),
        Some(nr) => {
            let len = nr.iter().map(|a| a * a).sum::<f64>().sqrt();
            let nh: Vec<f64> = nr.iter().map(|a| a / len).collect();
            let axis = (0..3).min_by(|&a, &b| nh[a].abs().total_cmp(&nh[b].abs())).unwrap();
            let mut e = [0.0; 3];
            e[axis] = 1.0;
            let u = unit(&cross(&nh, &e));
            let v = cross(&nh, &u);
            (u, v)
        }
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut idx: Vec<usize> = (0..points.len()).collect();
    let angle = |i: usize| {
        let d: Vec<f64> = points[i].iter().zip(&c).map(|(p, q)| p - q).collect();
        dot(&d, &v).atan2(dot(&d, &u))
    };
    idx.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
    idx
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn unit(a: &[f64]) -> Vec<f64> {
    let len = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    a.iter().map(|x| x / len).collect()
}

/// One disconnected component per cell; 2D cells sit in the plane `z = 0`.
pub fn off(region: &Region) -> Result<String> {
    if !(2..=3).contains(&region.dim) {
        bail!("OFF export supports dimensions 2 and 3, got {}", region.dim);
    }
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut faces: Vec<Vec<usize>> = Vec::new();
    for cell in &region.cells {
        let base = vertices.len();
        let pts: Vec<Vec<f64>> = cell.vertices().iter().map(|v| v.to_f64()).collect();
        if region.dim == 2 {
            faces.push(around(&pts, None).into_iter().map(|i| base + i).collect());
        } else {
            for h in cell.halfspaces() {
                let tight: Vec<usize> = (0..pts.len()).filter(|&i| h.is_tight(&cell.vertices()[i])).collect();
                let face_pts: Vec<Vec<f64>> = tight.iter().map(|&i| pts[i].clone()).collect();
                let order = around(&face_pts, Some(&h.normal.to_f64()));
                faces.push(order.into_iter().map(|j| base + tight[j]).collect());
            }
        }
        vertices.extend(pts.into_iter().map(|mut p| {
            p.resize(3, 0.0);
            p
        }));
    }
    let mut s = format!("OFF\n{} {} 0\n", vertices.len(), faces.len());
    for p in &vertices {
        let _ = writeln!(s, "{} {} {}", g17(p[0]), g17(p[1]), g17(p[2]));
    }
    for f in &faces {
        let idx: Vec<String> = f.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{} {}", f.len(), idx.join(" "));
    }
    Ok(s)
}

/// `"x3=0"` → axis 2 (zero-based) and the value.
pub fn parse_slice(spec: &str, dim: usize) -> Result<(usize, Rat)> {
    let bad = || anyhow!("slice must look like x3=0, got {spec:?}");
    let (lhs, rhs) = spec.split_once('=').ok_or_else(bad)?;
    let axis: usize = lhs.trim().strip_prefix('x').ok_or_else(bad)?.parse().map_err(|_| bad())?;
    if axis == 0 || axis > dim {
        bail!("slice axis x{axis} is outside 1..={dim}");
    }
    Ok((axis - 1, parse_rat(rhs)?))
}

/// Exact cross-sections of each cell with the plane `x_axis = value`,
/// as polygons in the remaining coordinates. Cuts of zero area are dropped.
pub fn slice(region: &Region, axis: usize, value: &Rat) -> Result<Vec<(usize, Vec<RatVec>)>> {
    let mut out = Vec::new();
    'cells: for (i, cell) in region.cells.iter().enumerate() {
        let mut hs = Vec::new();
        for h in cell.halfspaces() {
            let normal = RatVec((0..region.dim).filter(|&j| j != axis).map(|j| h.normal[j].clone()).collect());
            let offset = &h.offset - &h.normal[axis] * value;
            if normal.is_zero() {
                if offset < Rat::from_integer(0.into()) {
                    continue 'cells;
                }
                continue;
            }
            hs.push(HalfSpace::new(normal, offset)?);
        }
        let section = ConvexCell::from_halfspaces(region.dim - 1, hs)?;
        if section.is_full_dimensional() {
            out.push((i, section.vertices().to_vec()));
        }
    }
    Ok(out)
}

/// Filled polygons, one color per cell, `y` pointing up.
pub fn svg(polygons: &[(usize, Vec<RatVec>)]) -> String {
    let pts: Vec<(usize, Vec<Vec<f64>>)> =
        polygons.iter().map(|(i, vs)| (*i, vs.iter().map(|v| v.to_f64()).collect())).collect();
    let all = pts.iter().flat_map(|(_, p)| p.iter());
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in all {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    if pts.is_empty() {
        lo = [0.0; 2];
        hi = [1.0; 2];
    }
    let scale = SVG_SIZE / (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let margin = 10.0;
    let (w, h) = ((hi[0] - lo[0]) * scale + 2.0 * margin, (hi[1] - lo[1]) * scale + 2.0 * margin);
    let x = |v: f64| (v - lo[0]) * scale + margin;
    let y = |v: f64| (hi[1] - v) * scale + margin;
    let cells = polygons.iter().map(|p| p.0).max().map_or(1, |m| m + 1);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.1}\" height=\"{h:.1}\" viewBox=\"0 0 {w:.1} {h:.1}\">\n"
    );
    if lo[0] < 0.0 && hi[0] > 0.0 {
        let _ = writeln!(s, "  <line x1=\"{0:.3}\" y1=\"0\" x2=\"{0:.3}\" y2=\"{h:.1}\" stroke=\"#bbb\"/>", x(0.0));
    }
    if lo[1] < 0.0 && hi[1] > 0.0 {
        let _ = writeln!(s, "  <line x1=\"0\" y1=\"{0:.3}\" x2=\"{w:.1}\" y2=\"{0:.3}\" stroke=\"#bbb\"/>", y(0.0));
    }
    for (i, p) in &pts {
        let order = around(p, None);
        let coords: Vec<String> = order.iter().map(|&j| format!("{:.3},{:.3}", x(p[j][0]), y(p[j][1]))).collect();
        let hue = 360.0 * *i as f64 / cells as f64;
        let _ = writeln!(
            s,
            "  <polygon points=\"{}\" fill=\"hsl({hue:.0},65%,60%)\" fill-opacity=\"0.85\" stroke=\"#222\" stroke-width=\"1\"><title>cell {i}</title></polygon>",
            coords.join(" ")
        );
    }
    s += "</svg>\n";
    s
}

fn header(dim: usize) -> String {
    let mut cols: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    cols.push("inside".into());
    cols.push("cell".into());
    cols.join(",") + "\n"
}

fn uniform(rng: &mut ChaCha8Rng, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    lo.iter().zip(hi).map(|(a, b)| a + (b - a) * rng.gen::<f64>()).collect()
}

fn row(x: &[f64], inside: &str, cell: i64) -> String {
    let coords: Vec<String> = x.iter().map(|v| v.to_string()).collect();
    format!("{},{inside},{cell}\n", coords.join(","))
}

/// Uniform points over the bounding box with exact membership.
pub fn region_csv(region: &Region, samples: usize, seed: u64) -> String {
    let (lo, hi) = region.bounding_box();
    let (lo, hi) = (lo.to_f64(), hi.to_f64());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = header(region.dim);
    for _ in 0..samples {
        let x = uniform(&mut rng, &lo, &hi);
        let exact = RatVec(x.iter().map(|&v| from_f64(v).expect("finite")).collect());
        let cell = region.cells.iter().position(|c| c.contains(&exact));
        s += &match cell {
            Some(i) => row(&x, "1", i as i64),
            None => row(&x, "0", -1),
        };
    }
    s
}

/// Same cloud for a float description; tolerance-marginal points get `?`.
fn float_csv(file: &FloatRegionFile, samples: usize, seed: u64) -> String {
    let c = &file.float;
    let (lo, hi) = c.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = header(c.dim);
    for _ in 0..samples {
        let x = uniform(&mut rng, &lo, &hi);
        s += &match c.classify(&x, DEFAULT_TOLERANCE) {
            Tri::In => row(&x, "1", 0),
            Tri::Out => row(&x, "0", -1),
            Tri::Marginal => row(&x, "?", -1),
        };
    }
    s
}
