//! Versioned binary model checkpoints.
//!
//! Layout (little-endian): magic `SFMODEL\0`, `u32` version, `u32` input size,
//! `u32` hidden size, `u32` dense size, `u32` window length, then eleven tensors
//! (the nine trainable ones followed by the running mean and variance), each as a
//! `u64` element count and that many `f32` values.

use std::io::{Read, Write};

use super::params::{Architecture, Model, ModelParams, ParamSet, INPUT_SIZE};
use super::ClassifierError;

const MAGIC: &[u8; 8] = b"SFMODEL\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    /// Window length the model was trained on.
    pub window: usize,
}

fn put_u32(out: &mut impl Write, v: usize) -> Result<(), ClassifierError> {
    let v = u32::try_from(v).map_err(|_| ClassifierError::Checkpoint(format!("{v} does not fit in u32")))?;
    out.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get<const N: usize>(input: &mut impl Read) -> Result<[u8; N], ClassifierError> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => ClassifierError::Checkpoint("truncated file".into()),
        _ => ClassifierError::Io(e),
    })?;
    Ok(buf)
}

fn get_u32(input: &mut impl Read) -> Result<usize, ClassifierError> {
    Ok(u32::from_le_bytes(get(input)?) as usize)
}

pub fn write_checkpoint(out: &mut impl Write, checkpoint: &Checkpoint) -> Result<(), ClassifierError> {
    let m = &checkpoint.model;
    out.write_all(MAGIC)?;
    put_u32(out, CHECKPOINT_VERSION as usize)?;
    put_u32(out, INPUT_SIZE)?;
    put_u32(out, m.arch.hidden)?;
    put_u32(out, m.arch.dense)?;
    put_u32(out, checkpoint.window)?;
    let tensors = m.weights.tensors().into_iter().chain([&m.running_mean, &m.running_var]);
    for t in tensors {
        out.write_all(&(t.len() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(4 * t.len());
        for v in t {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_checkpoint(input: &mut impl Read) -> Result<Checkpoint, ClassifierError> {
    if &get::<8>(input)? != MAGIC {
        return Err(ClassifierError::Checkpoint("not a model checkpoint".into()));
    }
    let version = get_u32(input)?;
    if version != CHECKPOINT_VERSION as usize {
        return Err(ClassifierError::Checkpoint(format!("unsupported version {version}")));
    }
    let input_size = get_u32(input)?;
    if input_size != INPUT_SIZE {
        return Err(ClassifierError::Checkpoint(format!("input size {input_size}, expected {INPUT_SIZE}")));
    }
    let arch = Architecture { hidden: get_u32(input)?, dense: get_u32(input)? };
    let window = get_u32(input)?;
    let mut weights = ParamSet::<f32>::zeros(arch);
    let mut running_mean = vec![0.0f32; arch.dense];
    let mut running_var = vec![0.0f32; arch.dense];
    let mut slots = weights.tensors_mut().into_iter().chain([&mut running_mean, &mut running_var]).collect::<Vec<_>>();
    for (i, slot) in slots.iter_mut().enumerate() {
        let len = u64::from_le_bytes(get(input)?) as usize;
        if len != slot.len() {
            return Err(ClassifierError::Checkpoint(format!("tensor {i} holds {len} values, expected {}", slot.len())));
        }
        for v in slot.iter_mut() {
            *v = f32::from_le_bytes(get(input)?);
        }
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(ClassifierError::Checkpoint("trailing bytes".into()));
    }
    let model = ModelParams { arch, weights, running_mean, running_var };
    if !model.all_finite() {
        return Err(ClassifierError::NonFinite { layer: "checkpoint" });
    }
    Ok(Checkpoint { model, window })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let mut model = ModelParams::init(Architecture { hidden: 5, dense: 3 }, 4);
        model.running_mean = vec![0.25, -1.0, 3.5];
        let ck = Checkpoint { model, window: 64 };
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &ck).unwrap();
        assert_eq!(read_checkpoint(&mut buf.as_slice()).unwrap(), ck);
    }

    #[test]
    fn rejects_corruption() {
        let ck = Checkpoint { model: ModelParams::init(Architecture { hidden: 2, dense: 2 }, 1), window: 8 };
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &ck).unwrap();
        assert!(read_checkpoint(&mut &buf[..buf.len() - 1]).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(read_checkpoint(&mut extra.as_slice()).is_err());
        let mut bad = buf.clone();
        bad[8] = 9;
        assert!(read_checkpoint(&mut bad.as_slice()).is_err());
        let mut bad = buf;
        bad[0] = b'X';
        assert!(read_checkpoint(&mut bad.as_slice()).is_err());
    }
}
