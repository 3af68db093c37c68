//! Self-describing field files: one JSON header line, then a little-endian
//! `f32` payload (time-major, row-major; vector fields store the whole
//! u block before the v block).

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use super::{FlowField, ScalarField, SpatialGrid, TimeAxis};
use crate::error::{format_err, Error, Result};
use crate::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum AnyField<T> {
    Scalar(ScalarField<T>),
    Vector(FlowField<T>),
}

fn header<T: Real>(kind: &str, grid: &SpatialGrid<T>, time: &TimeAxis<T>) -> Value {
    json!({
        "kind": kind,
        "x0": grid.x0.as_f64(), "y0": grid.y0.as_f64(),
        "dx": grid.dx.as_f64(), "dy": grid.dy.as_f64(),
        "nx": grid.nx, "ny": grid.ny,
        "t0": time.t0.as_f64(), "dt": time.dt.as_f64(), "nt": time.nt,
    })
}

fn encode<T: Real>(head: Value, blocks: &[&[T]]) -> Vec<u8> {
    let mut out = serde_json::to_vec(&head).expect("header serializes");
    out.push(b'\n');
    for block in blocks {
        for v in block.iter() {
            out.extend_from_slice(&v.to_f32().unwrap_or(f32::NAN).to_le_bytes());
        }
    }
    out
}

pub fn encode_scalar<T: Real>(f: &ScalarField<T>) -> Vec<u8> {
    encode(header("scalar", &f.grid, &f.time), &[f.data()])
}

pub fn encode_flow<T: Real>(f: &FlowField<T>) -> Vec<u8> {
    encode(header("vector", &f.grid, &f.time), &[f.u_data(), f.v_data()])
}

pub fn write_scalar<T: Real>(f: &ScalarField<T>, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_scalar(f))
}

pub fn write_flow<T: Real>(f: &FlowField<T>, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_flow(f))
}

pub fn write_field<T: Real>(f: &AnyField<T>, path: impl AsRef<Path>) -> Result<()> {
    match f {
        AnyField::Scalar(s) => write_scalar(s, path),
        AnyField::Vector(v) => write_flow(v, path),
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(bytes)?;
    Ok(())
}

fn get_f64(map: &Map<String, Value>, key: &str) -> Result<f64> {
    let v = map
        .get(key)
        .ok_or_else(|| format_err(key, "missing"))?
        .as_f64()
        .ok_or_else(|| format_err(key, "not a number"))?;
    if !v.is_finite() {
        return Err(format_err(key, "not finite"));
    }
    Ok(v)
}

fn get_usize(map: &Map<String, Value>, key: &str) -> Result<usize> {
    let v = map
        .get(key)
        .ok_or_else(|| format_err(key, "missing"))?
        .as_u64()
        .ok_or_else(|| format_err(key, "not a non-negative integer"))?;
    usize::try_from(v).map_err(|_| format_err(key, "too large"))
}

pub fn decode_field<T: Real>(bytes: &[u8]) -> Result<AnyField<T>> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| format_err("header", "no newline-terminated header line"))?;
    let head: Value = serde_json::from_slice(&bytes[..nl]).map_err(|e| format_err("header", e.to_string()))?;
    let map = head
        .as_object()
        .ok_or_else(|| format_err("header", "not a JSON object"))?;
    let kind = map
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| format_err("kind", "missing or not a string"))?;
    let blocks = match kind {
        "scalar" => 1,
        "vector" => 2,
        other => return Err(format_err("kind", format!("unknown kind `{other}`"))),
    };

    let grid = SpatialGrid::new(
        T::lit(get_f64(map, "x0")?),
        T::lit(get_f64(map, "y0")?),
        T::lit(get_f64(map, "dx")?),
        T::lit(get_f64(map, "dy")?),
        get_usize(map, "nx")?,
        get_usize(map, "ny")?,
    )
    .map_err(|e| format_err("grid", e.to_string()))?;
    let time = TimeAxis::new(T::lit(get_f64(map, "t0")?), T::lit(get_f64(map, "dt")?), get_usize(map, "nt")?)
        .map_err(|e| format_err("time", e.to_string()))?;

    let block_len = grid.len() * time.nt;
    let payload = &bytes[nl + 1..];
    if payload.len() != blocks * block_len * 4 {
        return Err(format_err(
            "payload",
            format!(
                "{} bytes, header declares {} values ({} bytes)",
                payload.len(),
                blocks * block_len,
                blocks * block_len * 4
            ),
        ));
    }
    let mut values = Vec::with_capacity(blocks * block_len);
    for (idx, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        if !v.is_finite() {
            return Err(format_err(format!("payload[{idx}]"), "not finite"));
        }
        values.push(T::lit(f64::from(v)));
    }
    Ok(if blocks == 1 {
        AnyField::Scalar(ScalarField::new(grid, time, values)?)
    } else {
        let v = values.split_off(block_len);
        AnyField::Vector(FlowField::new(grid, time, values, v)?)
    })
}

pub fn read_field<T: Real>(path: impl AsRef<Path>) -> Result<AnyField<T>> {
    decode_field(&fs::read(path)?)
}

pub fn read_scalar<T: Real>(path: impl AsRef<Path>) -> Result<ScalarField<T>> {
    match read_field(path)? {
        AnyField::Scalar(s) => Ok(s),
        AnyField::Vector(_) => Err(Error::Format {
            key: "kind".into(),
            msg: "expected a scalar field, found vector".into(),
        }),
    }
}

pub fn read_flow<T: Real>(path: impl AsRef<Path>) -> Result<FlowField<T>> {
    match read_field(path)? {
        AnyField::Vector(v) => Ok(v),
        AnyField::Scalar(_) => Err(Error::Format {
            key: "kind".into(),
            msg: "expected a vector field, found scalar".into(),
        }),
    }
}
