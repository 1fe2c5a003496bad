//! Text checkpoint: `#key<TAB>value` header lines, then one
//! `name<TAB>RxC<TAB>base64(f32 little-endian)` line per parameter.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use sha2::{Digest, Sha256};

use super::{AutodiffError, ParamStore, Real, Tensor};

const MAGIC: &str = "transeg-checkpoint";
const VERSION: &str = "1";

/// Hex SHA-256 over `key=value` lines.
pub fn config_hash(meta: &[(String, String)]) -> String {
    let mut h = Sha256::new();
    for (k, v) in meta {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_checkpoint<T: Real>(params: &ParamStore<T>, meta: &[(String, String)]) -> String {
    let mut out = format!("#{MAGIC}\t{VERSION}\n#config_hash\t{}\n", config_hash(meta));
    for (k, v) in meta {
        out.push_str(&format!("#meta\t{k}={v}\n"));
    }
    for p in params.iter() {
        let mut bytes = Vec::with_capacity(p.value.data().len() * 4);
        for x in p.value.data() {
            bytes.extend_from_slice(&(x.as_f64() as f32).to_le_bytes());
        }
        let (r, c) = p.value.shape();
        out.push_str(&format!("{}\t{r}x{c}\t{}\n", p.name, STANDARD.encode(bytes)));
    }
    out
}

/// Parsed checkpoint: metadata plus parameters in file order.
pub struct Checkpoint<T> {
    pub meta: Vec<(String, String)>,
    pub params: ParamStore<T>,
}

impl<T> Checkpoint<T> {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn read_checkpoint<T: Real>(text: &str) -> Result<Checkpoint<T>, AutodiffError> {
    let bad = |msg: String| AutodiffError::Checkpoint(msg);
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l == format!("#{MAGIC}\t{VERSION}") => {}
        other => return Err(bad(format!("bad magic line {other:?}"))),
    }
    let hash = lines
        .next()
        .and_then(|l| l.strip_prefix("#config_hash\t"))
        .ok_or_else(|| bad("missing config hash".into()))?
        .to_owned();
    let mut meta = Vec::new();
    let mut params = ParamStore::new();
    for line in lines {
        if let Some(kv) = line.strip_prefix("#meta\t") {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("bad meta line {line:?}")))?;
            meta.push((k.to_owned(), v.to_owned()));
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut f = line.split('\t');
        let (Some(name), Some(shape), Some(data), None) = (f.next(), f.next(), f.next(), f.next()) else {
            return Err(bad(format!("bad parameter line for {:?}", line.split('\t').next())));
        };
        let (r, c) = shape
            .split_once('x')
            .and_then(|(r, c)| Some((r.parse::<usize>().ok()?, c.parse::<usize>().ok()?)))
            .ok_or_else(|| bad(format!("bad shape {shape:?}")))?;
        let bytes = STANDARD.decode(data).map_err(|e| bad(format!("{name}: {e}")))?;
        if bytes.len() != r * c * 4 {
            return Err(bad(format!("{name}: expected {} floats", r * c)));
        }
        let values = bytes
            .chunks_exact(4)
            .map(|b| T::of(f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64))
            .collect();
        params.add(name, Tensor::from_vec(r, c, values)?)?;
    }
    if config_hash(&meta) != hash {
        return Err(bad("config hash does not match metadata".into()));
    }
    Ok(Checkpoint { meta, params })
}
