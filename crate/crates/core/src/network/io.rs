//! `.mcm` model files.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! "MCM1" | u32 version (1) | u32 header_len | header (UTF-8 key=value lines)
//! per temporal layer: W_{-n} .. W_{+n} (row-major f64), bias (f64), mask (u8 per entry, masked layers only)
//! per dense layer:    W (row-major f64, inputs x outputs), bias (f64)
//! standardizer:       mean (f64 x l), std (f64 x l), only when header has standardizer=1
//! ```

use super::conditional::{ClnnLayer, MclnnLayer, TemporalLayer};
use super::dense::DenseLayer;
use super::model::{Architecture, Model};
use super::plan::plan_windows;
use super::{NetworkError, Transfer};
use crate::features::Standardizer;
use crate::masking::MaskMatrix;
use crate::numerics::Mat;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 4] = b"MCM1";
const VERSION: u32 = 1;

fn header(model: &Model) -> String {
    let a = &model.arch;
    let mut lines = vec![
        format!("architecture={}", if a.mask.is_some() { "mclnn" } else { "clnn" }),
        format!("n={}", a.order),
        format!("m={}", a.layers),
        format!("k={}", a.surviving),
        format!("l={}", a.feature_len),
        format!("e={}", a.width),
    ];
    if let Some((bw, ov)) = a.mask {
        lines.push(format!("bw={bw}"));
        lines.push(format!("ov={ov}"));
    }
    lines.extend([
        format!("f={}", a.transfer),
        format!("pooling={}", a.pooling),
        format!(
            "dense={}",
            a.dense.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
        ),
        format!("dense_f={}", a.dense_transfer),
        format!("class_count={}", a.class_count),
        format!("init_seed={}", model.init_seed),
        format!("standardizer={}", u8::from(model.standardizer.is_some())),
    ]);
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

pub fn write_model(model: &Model) -> Vec<u8> {
    let header = header(model);
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    let put = |out: &mut Vec<u8>, vals: &[f64]| {
        for v in vals {
            out.extend_from_slice(&v.to_le_bytes());
        }
    };
    for layer in &model.temporal {
        let base = layer.base();
        for w in &base.weights {
            put(&mut out, w.as_slice());
        }
        put(&mut out, &base.bias);
        if let Some(mask) = layer.mask() {
            out.extend_from_slice(mask.bits());
        }
    }
    for d in &model.dense {
        put(&mut out, d.weights.as_slice());
        put(&mut out, &d.bias);
    }
    if let Some(std) = &model.standardizer {
        put(&mut out, &std.mean);
        put(&mut out, &std.std);
    }
    out
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<(), NetworkError> {
    fs::write(path, write_model(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model, NetworkError> {
    read_model(&fs::read(path)?)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NetworkError> {
        let end = self.pos.checked_add(n).ok_or(NetworkError::TruncatedFile)?;
        let s = self.buf.get(self.pos..end).ok_or(NetworkError::TruncatedFile)?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, NetworkError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, NetworkError> {
        let bytes = self.take(n.checked_mul(8).ok_or(NetworkError::TruncatedFile)?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

fn field<T: std::str::FromStr>(map: &BTreeMap<&str, &str>, key: &str) -> Result<T, NetworkError> {
    let raw = map
        .get(key)
        .ok_or_else(|| NetworkError::BadHeader(format!("missing key '{key}'")))?;
    raw.parse()
        .map_err(|_| NetworkError::BadHeader(format!("bad value '{raw}' for '{key}'")))
}

pub fn read_model(bytes: &[u8]) -> Result<Model, NetworkError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if bytes.len() < 4 || r.take(4)? != MAGIC {
        return Err(NetworkError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(NetworkError::VersionMismatch(version));
    }
    let header_len = r.u32()? as usize;
    let header = std::str::from_utf8(r.take(header_len)?)
        .map_err(|_| NetworkError::BadHeader("header is not UTF-8".into()))?;
    let mut map = BTreeMap::new();
    for line in header.lines().filter(|l| !l.trim().is_empty()) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| NetworkError::BadHeader(format!("line '{line}' has no '='")))?;
        map.insert(k.trim(), v.trim());
    }

    let masked = match field::<String>(&map, "architecture")?.as_str() {
        "mclnn" => true,
        "clnn" => false,
        other => return Err(NetworkError::BadHeader(format!("unknown architecture '{other}'"))),
    };
    let dense_raw: String = field(&map, "dense")?;
    let dense_widths = if dense_raw.is_empty() {
        Vec::new()
    } else {
        dense_raw
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| NetworkError::BadHeader(format!("bad dense widths '{dense_raw}'")))?
    };
    let parse_tf = |key: &str| -> Result<Transfer, NetworkError> {
        field::<String>(&map, key)?.parse().map_err(NetworkError::BadHeader)
    };
    let arch = Architecture {
        feature_len: field(&map, "l")?,
        order: field(&map, "n")?,
        layers: field(&map, "m")?,
        surviving: field(&map, "k")?,
        width: field(&map, "e")?,
        mask: if masked {
            Some((field(&map, "bw")?, field(&map, "ov")?))
        } else {
            None
        },
        transfer: parse_tf("f")?,
        pooling: field::<String>(&map, "pooling")?
            .parse()
            .map_err(NetworkError::BadHeader)?,
        dense: dense_widths,
        dense_transfer: parse_tf("dense_f")?,
        class_count: field(&map, "class_count")?,
    };
    let init_seed: u64 = field(&map, "init_seed")?;
    let has_std = field::<u8>(&map, "standardizer")? == 1;
    let plan = plan_windows(arch.order, arch.layers, arch.surviving)?;

    let d = 2 * arch.order + 1;
    let mut temporal = Vec::with_capacity(arch.layers);
    let mut input = arch.feature_len;
    for _ in 0..arch.layers {
        let mut base = ClnnLayer::zeros(input, arch.width, arch.order, arch.transfer);
        for u in 0..d {
            base.weights[u] = Mat::from_vec(input, arch.width, r.f64s(input * arch.width)?)
                .expect("length checked");
        }
        base.bias = r.f64s(arch.width)?;
        temporal.push(if masked {
            let bits = r.take(input * arch.width)?.to_vec();
            let mask = MaskMatrix::from_bits(input, arch.width, bits).expect("length checked");
            TemporalLayer::Mclnn(MclnnLayer::new(base, mask)?)
        } else {
            TemporalLayer::Clnn(base)
        });
        input = arch.width;
    }
    let mut dense = Vec::with_capacity(arch.dense.len() + 1);
    let outs: Vec<(usize, Transfer)> = arch
        .dense
        .iter()
        .map(|&w| (w, arch.dense_transfer))
        .chain(std::iter::once((arch.class_count, Transfer::Identity)))
        .collect();
    for (w, tf) in outs {
        let weights = Mat::from_vec(input, w, r.f64s(input * w)?).expect("length checked");
        let bias = r.f64s(w)?;
        dense.push(DenseLayer {
            weights,
            bias,
            transfer: tf,
        });
        input = w;
    }
    let standardizer = if has_std {
        let mean = r.f64s(arch.feature_len)?;
        let std = r.f64s(arch.feature_len)?;
        Some(Standardizer { mean, std })
    } else {
        None
    };
    if r.pos != bytes.len() {
        return Err(NetworkError::BadHeader(format!(
            "{} trailing bytes after the parameter blocks",
            bytes.len() - r.pos
        )));
    }
    Ok(Model {
        arch,
        plan,
        temporal,
        dense,
        init_seed,
        standardizer,
    })
}
