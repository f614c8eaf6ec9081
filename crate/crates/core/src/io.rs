//! File formats: XYZ text clouds, PLY (ASCII and binary little-endian),
//! label files and partition exports.
//!
//! Label files hold one integer per line in point order, `-1` marking NOISE.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::cloud::{InstanceLabeling, Label, PointCloud};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec3::Vec3;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn sample_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Parses XYZ text: three coordinates per line, plus an integer label
/// column when `has_label_column` is set.
pub fn parse_xyz<T: Real>(
    id: &str,
    text: &str,
    has_label_column: bool,
) -> Result<(PointCloud<T>, Option<InstanceLabeling>)> {
    let expected = if has_label_column { 4 } else { 3 };
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != expected {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        let mut xyz = [T::zero(); 3];
        for (c, f) in xyz.iter_mut().zip(&fields[..3]) {
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid coordinate `{f}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("non-finite coordinate `{f}`"),
                });
            }
            *c = T::lit(v);
        }
        points.push(Vec3::from_array(xyz));
        if has_label_column {
            let l: Label = fields[3].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid label `{}`", fields[3]),
            })?;
            labels.push(l);
        }
    }
    if points.is_empty() {
        return Err(Error::Empty("XYZ file contains no points"));
    }
    let cloud = PointCloud::new(id, points)?;
    let labeling = if has_label_column {
        Some(InstanceLabeling::new(labels)?)
    } else {
        None
    };
    Ok((cloud, labeling))
}

pub fn load_xyz<T: Real>(
    path: impl AsRef<Path>,
    has_label_column: bool,
) -> Result<(PointCloud<T>, Option<InstanceLabeling>)> {
    let path = path.as_ref();
    parse_xyz(&sample_id(path), &read_text(path)?, has_label_column)
}

/// Number of whitespace-separated fields on the first non-blank line.
pub fn xyz_column_count(path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let text = read_text(path)?;
    text.lines()
        .map(|l| l.split_whitespace().count())
        .find(|&c| c > 0)
        .ok_or(Error::Empty("XYZ file contains no points"))
}

pub fn format_xyz<T: Real>(cloud: &PointCloud<T>, labels: Option<&InstanceLabeling>) -> Result<String> {
    if let Some(l) = labels {
        if l.len() != cloud.len() {
            return Err(Error::LengthMismatch {
                expected: cloud.len(),
                found: l.len(),
            });
        }
    }
    let mut out = String::with_capacity(cloud.len() * 32);
    for (i, p) in cloud.points().iter().enumerate() {
        let _ = write!(out, "{} {} {}", p.x, p.y, p.z);
        if let Some(l) = labels {
            let _ = write!(out, " {}", l.get(i));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn save_xyz<T: Real>(
    cloud: &PointCloud<T>,
    labels: Option<&InstanceLabeling>,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_text(path.as_ref(), &format_xyz(cloud, labels)?)
}

pub fn format_labeling(labeling: &InstanceLabeling) -> String {
    let mut out = String::with_capacity(labeling.len() * 3);
    for l in labeling.labels() {
        let _ = writeln!(out, "{l}");
    }
    out
}

pub fn parse_labeling(text: &str, expected_len: Option<usize>) -> Result<InstanceLabeling> {
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let l: Label = t.parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("invalid label `{t}`"),
        })?;
        labels.push(l);
    }
    if let Some(n) = expected_len {
        if labels.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: labels.len(),
            });
        }
    }
    InstanceLabeling::new(labels)
}

pub fn save_labeling(labeling: &InstanceLabeling, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &format_labeling(labeling))
}

/// Loads a label file, checking its length when `expected_len` is given.
pub fn load_labeling(path: impl AsRef<Path>, expected_len: Option<usize>) -> Result<InstanceLabeling> {
    parse_labeling(&read_text(path.as_ref())?, expected_len)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PlyScalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl PlyScalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn is_float(self) -> bool {
        matches!(self, Self::F32 | Self::F64)
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::F64 => f64::from_le_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]]),
        }
    }
}

#[derive(Debug)]
enum PlyProperty {
    Scalar { name: String, ty: PlyScalar },
    List { name: String },
}

impl PlyProperty {
    fn name(&self) -> &str {
        match self {
            Self::Scalar { name, .. } | Self::List { name } => name,
        }
    }
}

#[derive(Debug)]
struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<PlyProperty>,
}

struct PlyHeader {
    format: PlyFormat,
    elements: Vec<PlyElement>,
    body_offset: usize,
}

fn ply_err(msg: impl Into<String>) -> Error {
    Error::Ply(msg.into())
}

fn parse_ply_header(bytes: &[u8]) -> Result<PlyHeader> {
    const END: &[u8] = b"end_header";
    let end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| ply_err("missing end_header"))?;
    let mut body_offset = end + END.len();
    // the header terminator line ends with \n or \r\n
    if bytes.get(body_offset) == Some(&b'\r') {
        body_offset += 1;
    }
    if bytes.get(body_offset) == Some(&b'\n') {
        body_offset += 1;
    }
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| ply_err("header is not UTF-8"))?;
    let mut lines = header.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(ply_err("missing `ply` magic"));
    }
    let mut format = None;
    let mut elements: Vec<PlyElement> = Vec::new();
    for line in lines {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.as_slice() {
            [] => {}
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", f, _version] => {
                format = Some(match *f {
                    "ascii" => PlyFormat::Ascii,
                    "binary_little_endian" => PlyFormat::BinaryLittleEndian,
                    other => return Err(ply_err(format!("unsupported format `{other}`"))),
                });
            }
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| ply_err(format!("invalid element count `{count}`")))?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", _, _, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| ply_err("property before any element"))?;
                el.properties.push(PlyProperty::List { name: name.to_string() });
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| ply_err("property before any element"))?;
                let ty = PlyScalar::parse(ty)
                    .ok_or_else(|| ply_err(format!("unsupported type `{ty}` for property `{name}`")))?;
                el.properties.push(PlyProperty::Scalar {
                    name: name.to_string(),
                    ty,
                });
            }
            _ => return Err(ply_err(format!("malformed header line `{line}`"))),
        }
    }
    Ok(PlyHeader {
        format: format.ok_or_else(|| ply_err("missing format line"))?,
        elements,
        body_offset,
    })
}

struct VertexLayout {
    xyz: [usize; 3],
    normal: Option<[usize; 3]>,
    types: Vec<PlyScalar>,
}

fn vertex_layout(el: &PlyElement) -> Result<VertexLayout> {
    let mut types = Vec::with_capacity(el.properties.len());
    for p in &el.properties {
        match p {
            PlyProperty::Scalar { ty, .. } => types.push(*ty),
            PlyProperty::List { name } => {
                return Err(ply_err(format!("unsupported list property `{name}` in vertex element")))
            }
        }
    }
    let find = |name: &str| -> Result<Option<usize>> {
        match el.properties.iter().position(|p| p.name() == name) {
            None => Ok(None),
            Some(i) if types[i].is_float() => Ok(Some(i)),
            Some(i) => Err(ply_err(format!(
                "unsupported type {:?} for property `{name}` (expected float or double)",
                types[i]
            ))),
        }
    };
    let mut xyz = [0; 3];
    for (slot, name) in xyz.iter_mut().zip(["x", "y", "z"]) {
        *slot = find(name)?.ok_or_else(|| ply_err(format!("missing vertex property `{name}`")))?;
    }
    let normal = match (find("nx")?, find("ny")?, find("nz")?) {
        (Some(a), Some(b), Some(c)) => Some([a, b, c]),
        (None, None, None) => None,
        _ => return Err(ply_err("incomplete normal properties (need nx, ny, nz)")),
    };
    Ok(VertexLayout { xyz, normal, types })
}

pub fn parse_ply<T: Real>(id: &str, bytes: &[u8]) -> Result<PointCloud<T>> {
    let header = parse_ply_header(bytes)?;
    let body = &bytes[header.body_offset..];
    let vi = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| ply_err("no vertex element"))?;
    let layout = vertex_layout(&header.elements[vi])?;
    let count = header.elements[vi].count;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(count);

    match header.format {
        PlyFormat::Ascii => {
            let text = std::str::from_utf8(body).map_err(|_| ply_err("ASCII body is not UTF-8"))?;
            let mut lines = text.lines().filter(|l| !l.trim().is_empty());
            for el in &header.elements[..vi] {
                for _ in 0..el.count {
                    lines
                        .next()
                        .ok_or_else(|| ply_err(format!("unexpected end of `{}` data", el.name)))?;
                }
            }
            for v in 0..count {
                let line = lines.next().ok_or_else(|| ply_err("unexpected end of vertex data"))?;
                let vals = line
                    .split_whitespace()
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| ply_err(format!("invalid number in vertex {v}")))?;
                if vals.len() != layout.types.len() {
                    return Err(ply_err(format!(
                        "vertex {v}: expected {} values, found {}",
                        layout.types.len(),
                        vals.len()
                    )));
                }
                rows.push(vals);
            }
        }
        PlyFormat::BinaryLittleEndian => {
            let mut offset = 0usize;
            for el in &header.elements[..vi] {
                let mut row = 0;
                for p in &el.properties {
                    match p {
                        PlyProperty::Scalar { ty, .. } => row += ty.size(),
                        PlyProperty::List { name } => {
                            return Err(ply_err(format!(
                                "cannot skip list property `{name}` preceding vertex data"
                            )))
                        }
                    }
                }
                offset += row * el.count;
            }
            let row_size: usize = layout.types.iter().map(|t| t.size()).sum();
            let needed = offset + row_size * count;
            if body.len() < needed {
                return Err(ply_err("unexpected end of vertex data"));
            }
            for v in 0..count {
                let mut at = offset + v * row_size;
                let mut vals = Vec::with_capacity(layout.types.len());
                for ty in &layout.types {
                    vals.push(ty.read_le(&body[at..at + ty.size()]));
                    at += ty.size();
                }
                rows.push(vals);
            }
        }
    }

    if rows.is_empty() {
        return Err(Error::Empty("PLY file contains no vertices"));
    }
    let points = rows
        .iter()
        .map(|r| {
            Vec3::new(
                T::lit(r[layout.xyz[0]]),
                T::lit(r[layout.xyz[1]]),
                T::lit(r[layout.xyz[2]]),
            )
        })
        .collect();
    let cloud = PointCloud::new(id, points)?;
    match layout.normal {
        None => Ok(cloud),
        Some(ni) => cloud.with_normals(
            rows.iter()
                .map(|r| Vec3::new(T::lit(r[ni[0]]), T::lit(r[ni[1]]), T::lit(r[ni[2]])))
                .collect(),
        ),
    }
}

pub fn load_ply<T: Real>(path: impl AsRef<Path>) -> Result<PointCloud<T>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_ply(&sample_id(path), &bytes)
}

/// Encodes a cloud as PLY with double-precision vertex properties.
pub fn encode_ply<T: Real>(cloud: &PointCloud<T>, format: PlyFormat) -> Vec<u8> {
    let normals = cloud.normals();
    let mut header = String::from("ply\n");
    header.push_str(match format {
        PlyFormat::Ascii => "format ascii 1.0\n",
        PlyFormat::BinaryLittleEndian => "format binary_little_endian 1.0\n",
    });
    let _ = writeln!(header, "element vertex {}", cloud.len());
    let mut names = vec!["x", "y", "z"];
    if normals.is_some() {
        names.extend(["nx", "ny", "nz"]);
    }
    for n in &names {
        let _ = writeln!(header, "property double {n}");
    }
    header.push_str("end_header\n");
    let mut out = header.into_bytes();
    for i in 0..cloud.len() {
        let p = cloud.point(i);
        let mut vals = vec![p.x, p.y, p.z];
        if let Some(n) = normals {
            vals.extend([n[i].x, n[i].y, n[i].z]);
        }
        match format {
            PlyFormat::Ascii => {
                let line: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
            PlyFormat::BinaryLittleEndian => {
                for v in vals {
                    out.extend_from_slice(&v.as_f64().to_le_bytes());
                }
            }
        }
    }
    out
}

pub fn save_ply<T: Real>(cloud: &PointCloud<T>, path: impl AsRef<Path>, format: PlyFormat) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_ply(cloud, format)).map_err(|e| Error::io(path, e))
}

/// Loads `.ply` files as PLY and anything else as XYZ. The label column of
/// XYZ files is detected from the first line.
pub fn load_cloud<T: Real>(path: impl AsRef<Path>) -> Result<(PointCloud<T>, Option<InstanceLabeling>)> {
    let path = path.as_ref();
    let is_ply = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ply"));
    if is_ply {
        Ok((load_ply(path)?, None))
    } else {
        let cols = xyz_column_count(path)?;
        load_xyz(path, cols == 4)
    }
}

/// One line per point holding the id of the group containing it.
pub fn format_partition(groups: &[Vec<usize>], n_points: usize) -> Result<String> {
    let mut ids = vec![usize::MAX; n_points];
    for (g, members) in groups.iter().enumerate() {
        for &i in members {
            if i >= n_points || ids[i] != usize::MAX {
                return Err(Error::InvalidData(format!(
                    "point {i} is out of range or covered twice"
                )));
            }
            ids[i] = g;
        }
    }
    if let Some(i) = ids.iter().position(|&g| g == usize::MAX) {
        return Err(Error::InvalidData(format!("point {i} is not covered")));
    }
    let mut out = String::with_capacity(n_points * 4);
    for g in ids {
        let _ = writeln!(out, "{g}");
    }
    Ok(out)
}

/// Reads a partition export back into groups ordered by id.
pub fn parse_partition(text: &str) -> Result<Vec<Vec<usize>>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
        let g: usize = line.trim().parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("invalid group id `{}`", line.trim()),
        })?;
        if g >= groups.len() {
            groups.resize_with(g + 1, Vec::new);
        }
        groups[g].push(i);
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::NOISE;

    #[test]
    fn xyz_two_points() {
        let (c, l) = parse_xyz::<f64>("s", "0 0 0\n1 0 0\n", false).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.point(1), Vec3::new(1.0, 0.0, 0.0));
        assert!(l.is_none());
    }

    #[test]
    fn xyz_noise_label() {
        let (c, l) = parse_xyz::<f64>("s", "0 0 0 -1\n", true).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(l.unwrap().labels(), &[NOISE]);
    }

    #[test]
    fn xyz_bad_field_reports_line() {
        match parse_xyz::<f64>("s", "0 0 x\n", false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        match parse_xyz::<f64>("s", "0 0 0\n1 2\n", false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn xyz_empty_is_error() {
        assert!(matches!(parse_xyz::<f64>("s", "", false), Err(Error::Empty(_))));
    }

    #[test]
    fn labeling_text_format() {
        let l = InstanceLabeling::new(vec![2, 2, -1]).unwrap();
        let text = format_labeling(&l);
        assert_eq!(text, "2\n2\n-1\n");
        assert_eq!(parse_labeling(&text, Some(3)).unwrap(), l);
    }

    #[test]
    fn empty_labeling_round_trip() {
        let l = InstanceLabeling::new(vec![]).unwrap();
        let text = format_labeling(&l);
        assert_eq!(text, "");
        assert_eq!(parse_labeling(&text, Some(0)).unwrap(), l);
    }

    #[test]
    fn labeling_length_mismatch() {
        let err = parse_labeling("1\n2\n3\n", Some(4)).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { expected: 4, found: 3 }));
    }

    #[test]
    fn minimal_ascii_ply() {
        let ply = "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 0 0\n0 1 0\n";
        let c = parse_ply::<f64>("s", ply.as_bytes()).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.normals().is_none());
        assert_eq!(c.point(2), Vec3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn ascii_ply_normals_renormalized() {
        let ply = "ply\nformat ascii 1.0\ncomment test\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nproperty float nx\nproperty float ny\nproperty float nz\nproperty uchar red\nend_header\n0 0 0 0 0 2 255\n1 0 0 3 4 0 10\n";
        let c = parse_ply::<f64>("s", ply.as_bytes()).unwrap();
        let n = c.normals().unwrap();
        assert!((n[0].z - 1.0).abs() < 1e-12);
        assert!((n[1].x - 0.6).abs() < 1e-7 && (n[1].y - 0.8).abs() < 1e-7);
    }

    #[test]
    fn binary_ply_float32_and_truncation() {
        let mut bytes = b"ply\nformat binary_little_endian 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n".to_vec();
        for v in [0.5f32, 1.5, 2.5, -1.0, 0.25, 8.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let c = parse_ply::<f64>("s", &bytes).unwrap();
        assert_eq!(c.point(1), Vec3::new(-1.0, 0.25, 8.0));

        bytes.truncate(bytes.len() - 3);
        let err = parse_ply::<f64>("s", &bytes).unwrap_err();
        assert!(err.to_string().contains("unexpected end of vertex data"), "{err}");
    }

    #[test]
    fn ply_integer_coordinate_is_rejected_by_name() {
        let ply = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty uchar y\nproperty float z\nend_header\n0 0 0\n";
        let err = parse_ply::<f64>("s", ply.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("`y`"), "{err}");
        let ply = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty int128 z\nend_header\n0 0 0\n";
        let err = parse_ply::<f64>("s", ply.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("`z`"), "{err}");
    }

    #[test]
    fn ply_skips_preceding_scalar_element() {
        let mut bytes = b"ply\nformat binary_little_endian 1.0\nelement meta 1\nproperty int tag\nelement vertex 1\nproperty double x\nproperty double y\nproperty double z\nelement face 0\nproperty list uchar int vertex_indices\nend_header\n".to_vec();
        bytes.extend_from_slice(&7i32.to_le_bytes());
        for v in [1.0f64, 2.0, 3.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let c = parse_ply::<f64>("s", &bytes).unwrap();
        assert_eq!(c.point(0), Vec3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn partition_export_requires_full_cover() {
        assert!(format_partition(&[vec![0, 2]], 3).is_err());
        assert!(format_partition(&[vec![0, 1], vec![1, 2]], 3).is_err());
        let text = format_partition(&[vec![1], vec![0, 2]], 3).unwrap();
        assert_eq!(text, "1\n0\n1\n");
        assert_eq!(parse_partition(&text).unwrap(), vec![vec![1], vec![0, 2]]);
    }
}
