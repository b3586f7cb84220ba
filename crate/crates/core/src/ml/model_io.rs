//! Model file: `EMGCNN\0\0`, u16 version, u8 arm, u16 x 6 arch
//! (rows, cols, conv1, conv2, hidden, classes), one length-prefixed label
//! name per class, u32 parameter count, then that many f32 values. All
//! integers and floats are little-endian. Parameters are stored in the
//! order of `Params::tensors`, followed by both batch-norm running means and
//! variances.

use std::io::{self, Read, Write};
use std::path::Path;

use ndarray::Array1;

use super::cnn::{Arch, BnRunning, Cnn, Params};
use super::MlError;
use crate::gesture::{Arm, Gesture};

pub const MODEL_MAGIC: &[u8; 8] = b"EMGCNN\0\0";
pub const MODEL_VERSION: u16 = 1;

/// Classifier with the arm it was trained for.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel {
    pub arm: Arm,
    pub cnn: Cnn<f32>,
}

fn bad(msg: impl Into<String>) -> MlError {
    MlError::BadModel(msg.into())
}

pub fn write_model<W: Write>(model: &ArmModel, mut w: W) -> io::Result<()> {
    let a = &model.cnn.arch;
    w.write_all(MODEL_MAGIC)?;
    w.write_all(&MODEL_VERSION.to_le_bytes())?;
    w.write_all(&[model.arm.index() as u8])?;
    for v in [a.rows, a.cols, a.conv1, a.conv2, a.hidden, a.classes] {
        w.write_all(&(v as u16).to_le_bytes())?;
    }
    for g in &model.cnn.labels {
        let name = g.name().as_bytes();
        w.write_all(&[name.len() as u8])?;
        w.write_all(name)?;
    }
    let mut values: Vec<f32> = Vec::with_capacity(a.n_params() + 2 * (a.conv1 + a.conv2));
    for t in model.cnn.params.tensors() {
        values.extend_from_slice(t);
    }
    for bn in &model.cnn.bn {
        values.extend(bn.mean.iter());
        values.extend(bn.var.iter());
    }
    w.write_all(&(values.len() as u32).to_le_bytes())?;
    let mut bytes = Vec::with_capacity(values.len() * 4);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&bytes)?;
    w.flush()
}

fn take<'a>(buf: &mut &'a [u8], n: usize) -> Result<&'a [u8], MlError> {
    if buf.len() < n {
        return Err(bad("truncated model file"));
    }
    let (head, rest) = buf.split_at(n);
    *buf = rest;
    Ok(head)
}

fn u16_at(buf: &mut &[u8]) -> Result<u16, MlError> {
    Ok(u16::from_le_bytes(take(buf, 2)?.try_into().unwrap()))
}

pub fn read_model<R: Read>(mut r: R) -> Result<ArmModel, MlError> {
    let mut all = Vec::new();
    r.read_to_end(&mut all)
        .map_err(|e| MlError::Io(e.to_string()))?;
    let mut buf = all.as_slice();
    if take(&mut buf, 8)? != MODEL_MAGIC {
        return Err(bad("not a model file (bad magic)"));
    }
    let version = u16_at(&mut buf)?;
    if version != MODEL_VERSION {
        return Err(bad(format!("unsupported model version {version}")));
    }
    let arm = match take(&mut buf, 1)?[0] {
        0 => Arm::Left,
        1 => Arm::Right,
        x => return Err(bad(format!("bad arm tag {x}"))),
    };
    let mut dims = [0usize; 6];
    for d in dims.iter_mut() {
        *d = u16_at(&mut buf)? as usize;
    }
    let arch = Arch {
        rows: dims[0],
        cols: dims[1],
        conv1: dims[2],
        conv2: dims[3],
        hidden: dims[4],
        classes: dims[5],
    };
    let mut labels = Vec::with_capacity(arch.classes);
    for _ in 0..arch.classes {
        let n = take(&mut buf, 1)?[0] as usize;
        let name =
            std::str::from_utf8(take(&mut buf, n)?).map_err(|_| bad("label is not utf-8"))?;
        labels.push(name.parse::<Gesture>().map_err(|e| bad(e.to_string()))?);
    }
    let count = u32::from_le_bytes(take(&mut buf, 4)?.try_into().unwrap()) as usize;
    let expected = arch.n_params() + 2 * (arch.conv1 + arch.conv2);
    if count != expected {
        return Err(bad(format!(
            "parameter count {count} does not match architecture ({expected})"
        )));
    }
    let raw = take(&mut buf, count * 4)?;
    if !buf.is_empty() {
        return Err(bad("trailing bytes after parameters"));
    }
    let mut values = raw
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()));
    let mut params = Params::<f32>::zeros(&arch);
    for t in params.tensors_mut() {
        t.iter_mut().for_each(|v| *v = values.next().unwrap());
    }
    let mut next_vec = |n: usize| Array1::from_iter(values.by_ref().take(n));
    let bn = [
        BnRunning {
            mean: next_vec(arch.conv1),
            var: next_vec(arch.conv1),
        },
        BnRunning {
            mean: next_vec(arch.conv2),
            var: next_vec(arch.conv2),
        },
    ];
    Ok(ArmModel {
        arm,
        cnn: Cnn {
            arch,
            labels,
            params,
            bn,
        },
    })
}

pub fn save_model(model: &ArmModel, path: &Path) -> Result<(), MlError> {
    let f =
        std::fs::File::create(path).map_err(|e| MlError::Io(format!("{}: {e}", path.display())))?;
    write_model(model, io::BufWriter::new(f))
        .map_err(|e| MlError::Io(format!("{}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> Result<ArmModel, MlError> {
    let f =
        std::fs::File::open(path).map_err(|e| MlError::Io(format!("{}: {e}", path.display())))?;
    read_model(io::BufReader::new(f))
}
