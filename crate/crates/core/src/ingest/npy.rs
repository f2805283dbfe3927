//! Minimal NPY v1.0 reader/writer for motion arrays.
//!
//! Only what text-to-motion exports need: little-endian `f4`/`f8`, C order,
//! shape `(F, 22, 3)` or `(F, 66)`.

use super::IngestError;
use crate::kinematics::{JointTrajectory, DEFAULT_FRAME_RATE_HZ, SMPL_JOINTS};

const MAGIC: &[u8; 6] = b"\x93NUMPY";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpyDtype {
    F32,
    F64,
}

#[derive(Debug, Clone, PartialEq)]
struct Header {
    dtype: NpyDtype,
    fortran_order: bool,
    shape: Vec<usize>,
}

/// Reads a motion array. `frame_rate` defaults to 46 Hz when `None`.
pub fn read_motion_array(bytes: &[u8], frame_rate: Option<f64>) -> Result<JointTrajectory, IngestError> {
    let (header, data) = parse(bytes)?;
    let frames = match header.shape.as_slice() {
        [f, j, 3] if *j == SMPL_JOINTS => *f,
        [f, n] if *n == SMPL_JOINTS * 3 => *f,
        other => return Err(IngestError::Shape(format!("{other:?}"))),
    };
    if header.fortran_order {
        return Err(IngestError::Format("fortran-ordered arrays are not supported".into()));
    }
    let count = frames * SMPL_JOINTS * 3;
    let width = match header.dtype {
        NpyDtype::F32 => 4,
        NpyDtype::F64 => 8,
    };
    if data.len() != count * width {
        return Err(IngestError::Format(format!(
            "payload holds {} bytes, shape {:?} needs {}",
            data.len(),
            header.shape,
            count * width
        )));
    }
    let values: Vec<f64> = match header.dtype {
        NpyDtype::F32 => data
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect(),
        NpyDtype::F64 => data
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect(),
    };
    Ok(JointTrajectory::from_flat(&values, frame_rate.unwrap_or(DEFAULT_FRAME_RATE_HZ))?)
}

/// Serializes a flat C-order buffer with the given shape as NPY v1.0.
pub fn write_npy(values: &[f64], shape: &[usize], dtype: NpyDtype) -> Vec<u8> {
    assert_eq!(values.len(), shape.iter().product::<usize>(), "shape does not match value count");
    let descr = match dtype {
        NpyDtype::F32 => "<f4",
        NpyDtype::F64 => "<f8",
    };
    let shape_str = match shape {
        [one] => format!("({one},)"),
        _ => format!("({})", shape.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")),
    };
    let mut dict = format!("{{'descr': '{descr}', 'fortran_order': False, 'shape': {shape_str}, }}");
    // Magic (6) + version (2) + length (2) + dict + newline must be a multiple of 64.
    let unpadded = 10 + dict.len() + 1;
    dict.push_str(&" ".repeat((64 - unpadded % 64) % 64));
    dict.push('\n');

    let mut out = Vec::with_capacity(10 + dict.len() + values.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(dict.len() as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    for &v in values {
        match dtype {
            NpyDtype::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
            NpyDtype::F64 => out.extend_from_slice(&v.to_le_bytes()),
        }
    }
    out
}

/// Writes a trajectory as `(F, 22, 3)` float64.
pub fn write_motion_array(traj: &JointTrajectory) -> Vec<u8> {
    let flat: Vec<f64> = traj.positions().iter().flatten().copied().collect();
    write_npy(&flat, &[traj.frames(), SMPL_JOINTS, 3], NpyDtype::F64)
}

fn parse(bytes: &[u8]) -> Result<(Header, &[u8]), IngestError> {
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(IngestError::Format("missing NPY magic".into()));
    }
    if bytes[6] != 1 || bytes[7] != 0 {
        return Err(IngestError::Format(format!("unsupported NPY version {}.{}", bytes[6], bytes[7])));
    }
    let len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let dict = bytes
        .get(10..10 + len)
        .ok_or_else(|| IngestError::Format("truncated NPY header".into()))?;
    let dict = std::str::from_utf8(dict).map_err(|_| IngestError::Format("NPY header is not ASCII".into()))?;
    Ok((parse_header(dict)?, &bytes[10 + len..]))
}

fn dict_value<'a>(dict: &'a str, key: &str) -> Result<&'a str, IngestError> {
    let needle = format!("'{key}'");
    let start = dict
        .find(&needle)
        .ok_or_else(|| IngestError::Format(format!("NPY header lacks `{key}`")))?;
    let rest = dict[start + needle.len()..].trim_start();
    let rest = rest
        .strip_prefix(':')
        .ok_or_else(|| IngestError::Format(format!("malformed `{key}` entry")))?;
    Ok(rest.trim_start())
}

fn parse_header(dict: &str) -> Result<Header, IngestError> {
    let descr = dict_value(dict, "descr")?;
    let quote = descr.chars().next().filter(|c| *c == '\'' || *c == '"');
    let descr = match quote {
        Some(q) => descr[1..].split(q).next().unwrap_or_default(),
        None => return Err(IngestError::Format("malformed descr".into())),
    };
    let dtype = match descr {
        "<f4" => NpyDtype::F32,
        "<f8" => NpyDtype::F64,
        other => return Err(IngestError::Shape(format!("unsupported dtype `{other}`"))),
    };

    let fortran = dict_value(dict, "fortran_order")?;
    let fortran_order = if fortran.starts_with("True") {
        true
    } else if fortran.starts_with("False") {
        false
    } else {
        return Err(IngestError::Format("malformed fortran_order".into()));
    };

    let shape = dict_value(dict, "shape")?;
    let body = shape
        .strip_prefix('(')
        .and_then(|s| s.split(')').next())
        .ok_or_else(|| IngestError::Format("malformed shape".into()))?;
    let shape = body
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| IngestError::Format(format!("bad shape entry `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(Header { dtype, fortran_order, shape })
}
