use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use msr_core::{
    verify_all, CodeParams, Codeword, Error, Gf, MsrCode, NodeId, VerificationReport, VerifyOptions,
};

use crate::error::{CliError, Result};
use crate::shard::{
    pack_symbols, read_symbol, symbol_offset, unpack_symbols, write_symbol, ShardHeader, HEADER_LEN,
};

pub fn shard_file_name(node_id: usize) -> String {
    format!("shard_{node_id:02}.msr")
}

#[derive(Debug, Clone)]
pub struct EncodeSummary {
    pub params: CodeParams,
    pub stripes: u64,
    pub payload_len: u64,
    pub shards: Vec<PathBuf>,
}

impl fmt::Display for EncodeSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "encoded {} bytes into {} stripes, {} shards {}",
            self.payload_len,
            self.stripes,
            self.shards.len(),
            self.params
        )
    }
}

pub fn encode(n: usize, k: usize, d: usize, input: &Path, out_dir: &Path) -> Result<EncodeSummary> {
    let code = MsrCode::new(n, k, d)?;
    let p = *code.params();
    let sb = code.field().symbol_bytes();
    let data = fs::read(input).map_err(CliError::io(input))?;
    let symbols = pack_symbols(&data, p.m);
    let stripe_len = p.message_len();
    let stripes = symbols.len().div_ceil(stripe_len) as u64;

    fs::create_dir_all(out_dir).map_err(CliError::io(out_dir))?;
    let mut shards = Vec::with_capacity(n);
    let mut writers = Vec::with_capacity(n);
    for id in 0..n {
        let path = out_dir.join(shard_file_name(id));
        let mut w = BufWriter::new(File::create(&path).map_err(CliError::io(&path))?);
        ShardHeader::for_code(&code, id, stripes, data.len() as u64)
            .write_to(&mut w)
            .map_err(CliError::io(&path))?;
        writers.push(w);
        shards.push(path);
    }

    let mut buf = Vec::with_capacity(p.alpha * sb);
    let mut msg = vec![Gf::ZERO; stripe_len];
    for chunk in symbols.chunks(stripe_len) {
        msg[..chunk.len()].copy_from_slice(chunk);
        msg[chunk.len()..].fill(Gf::ZERO);
        let cw = code.encode(&msg)?;
        for (id, w) in writers.iter_mut().enumerate() {
            buf.clear();
            for &v in cw.node(code.node(id)) {
                write_symbol(&mut buf, v, sb);
            }
            w.write_all(&buf).map_err(CliError::io(&shards[id]))?;
        }
    }
    for (w, path) in writers.into_iter().zip(&shards) {
        w.into_inner()
            .map_err(|e| CliError::io(path)(e.into_error()))?
            .sync_all()
            .map_err(CliError::io(path))?;
    }
    Ok(EncodeSummary {
        params: p,
        stripes,
        payload_len: data.len() as u64,
        shards,
    })
}

/// The consistent set of shards found in a directory, keyed by node id.
#[derive(Debug)]
pub struct ShardSet {
    pub header: ShardHeader,
    pub code: MsrCode,
    pub files: BTreeMap<usize, PathBuf>,
}

impl ShardSet {
    /// Reads every `*.msr` file in `dir`. Any unreadable, corrupt, truncated
    /// or mismatched shard is an error.
    pub fn load(dir: &Path) -> Result<Self> {
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(CliError::io(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "msr"))
            .collect();
        paths.sort();
        let mut header: Option<ShardHeader> = None;
        let mut files = BTreeMap::new();
        for path in paths {
            let bad = |reason: String| CliError::BadShard {
                path: path.clone(),
                reason,
            };
            let file = File::open(&path).map_err(CliError::io(&path))?;
            let len = file.metadata().map_err(CliError::io(&path))?.len();
            let h = ShardHeader::read_from(&file)
                .map_err(CliError::io(&path))?
                .map_err(bad)?;
            if let Some(first) = &header {
                if !first.same_stripe_set(&h) {
                    return Err(bad("header does not match the other shards".into()));
                }
            }
            let p = h.params()?;
            let sb = (h.m as usize).div_ceil(8);
            let expected = symbol_offset(&p, sb, h.stripe_count, 0);
            if len != expected {
                return Err(bad(format!("expected {expected} bytes, found {len}")));
            }
            if files.insert(h.node_id as usize, path.clone()).is_some() {
                return Err(bad(format!("duplicate shard for node {}", h.node_id)));
            }
            header.get_or_insert(h);
        }
        let header = header
            .ok_or_else(|| CliError::Usage(format!("no shard files in {}", dir.display())))?;
        let code = MsrCode::new(header.n as usize, header.k as usize, header.d as usize)?;
        Ok(ShardSet {
            header,
            code,
            files,
        })
    }

    pub fn params(&self) -> &CodeParams {
        self.code.params()
    }

    pub fn missing(&self) -> Vec<NodeId> {
        (0..self.params().n)
            .filter(|id| !self.files.contains_key(id))
            .map(|id| self.code.node(id))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct DecodeSummary {
    pub params: CodeParams,
    pub present: Vec<usize>,
    pub erased: Vec<usize>,
    pub stripes: u64,
    pub bytes: u64,
}

impl fmt::Display for DecodeSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "decoded {} bytes from {} stripes; shards present {:?}, rebuilt {:?}",
            self.bytes, self.stripes, self.present, self.erased
        )
    }
}

pub fn decode(shards: &Path, out: &Path) -> Result<DecodeSummary> {
    let set = ShardSet::load(shards)?;
    let code = &set.code;
    let p = *set.params();
    let sb = code.field().symbol_bytes();
    let missing = set.missing();
    let plan = code.decode_plan(&missing)?;

    let mut readers = Vec::new();
    for (&id, path) in &set.files {
        let mut r = BufReader::new(File::open(path).map_err(CliError::io(path))?);
        r.seek(SeekFrom::Start(HEADER_LEN as u64))
            .map_err(CliError::io(path))?;
        readers.push((code.node(id), path, r));
    }

    let mut cw = Codeword::zeros(p);
    let mut symbols = Vec::with_capacity(set.header.stripe_count as usize * p.message_len());
    let mut buf = vec![0u8; p.alpha * sb];
    for _ in 0..set.header.stripe_count {
        for (node, path, r) in readers.iter_mut() {
            r.read_exact(&mut buf).map_err(CliError::io(&**path))?;
            for (dst, src) in cw.node_mut(*node).iter_mut().zip(buf.chunks_exact(sb)) {
                *dst = read_symbol(src);
            }
        }
        plan.apply(&mut cw);
        symbols.extend(code.message(&cw));
    }
    let data = unpack_symbols(&symbols, p.m, set.header.payload_len as usize);
    if data.len() as u64 != set.header.payload_len {
        return Err(CliError::BadShard {
            path: shards.to_path_buf(),
            reason: "stripes hold fewer bytes than the recorded payload length".into(),
        });
    }
    fs::write(out, &data).map_err(CliError::io(out))?;
    Ok(DecodeSummary {
        params: p,
        present: set.files.keys().copied().collect(),
        erased: missing.iter().map(|n| n.id(p.q)).collect(),
        stripes: set.header.stripe_count,
        bytes: data.len() as u64,
    })
}

#[derive(Debug, Clone)]
pub struct RepairSummary {
    pub params: CodeParams,
    pub failed: usize,
    pub stripes: u64,
    /// `(helper id, bytes read from its shard)`.
    pub reads: Vec<(usize, u64)>,
    /// `stripes · β · ⌈m/8⌉`.
    pub expected_per_helper: u64,
    pub out: PathBuf,
}

impl RepairSummary {
    pub fn total_read(&self) -> u64 {
        self.reads.iter().map(|r| r.1).sum()
    }

    /// Repair download relative to a full reconstruction, `d·β / (k·α)`.
    pub fn ratio(&self) -> f64 {
        self.params.repair_bandwidth() as f64 / self.params.message_len() as f64
    }
}

impl fmt::Display for RepairSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "repaired node {} over {} stripes -> {}",
            self.failed,
            self.stripes,
            self.out.display()
        )?;
        for (id, bytes) in &self.reads {
            writeln!(f, "  helper {id:>3}: read {bytes} bytes")?;
        }
        write!(
            f,
            "  per helper: {} bytes expected (stripes*beta*symbol_bytes); total {} bytes; d*beta/(k*alpha) = {}/{} = {:.4}",
            self.expected_per_helper,
            self.total_read(),
            self.params.repair_bandwidth(),
            self.params.message_len(),
            self.ratio()
        )
    }
}

/// Rebuilds shard `failed` from the first `d` other shards in `shards`,
/// reading only the repair planes of each helper.
pub fn repair(failed: usize, shards: &Path, out: &Path) -> Result<RepairSummary> {
    let set = ShardSet::load(shards)?;
    let code = &set.code;
    let p = *set.params();
    if failed >= p.n {
        return Err(CliError::Usage(format!(
            "failed node {failed} out of range for n={}",
            p.n
        )));
    }
    let helper_ids: Vec<usize> = set
        .files
        .keys()
        .copied()
        .filter(|&id| id != failed)
        .take(p.d)
        .collect();
    if helper_ids.len() < p.d {
        return Err(CliError::Usage(format!(
            "repair needs d={} helper shards besides node {failed}, found {}",
            p.d,
            helper_ids.len()
        )));
    }
    let helpers: Vec<NodeId> = helper_ids.iter().map(|&id| code.node(id)).collect();
    let plan = code.repair_plan(code.node(failed), &helpers)?;
    let sb = code.field().symbol_bytes();

    let mut files: BTreeMap<NodeId, (File, &PathBuf, u64)> = BTreeMap::new();
    for (&id, node) in helper_ids.iter().zip(&helpers) {
        let path = &set.files[&id];
        files.insert(
            *node,
            (File::open(path).map_err(CliError::io(path))?, path, 0),
        );
    }

    let header = ShardHeader {
        node_id: failed as u16,
        ..set.header
    };
    let mut w = BufWriter::new(File::create(out).map_err(CliError::io(out))?);
    header.write_to(&mut w).map_err(CliError::io(out))?;
    let mut sym = vec![0u8; sb];
    let mut buf = Vec::with_capacity(p.alpha * sb);
    for stripe in 0..set.header.stripe_count {
        let (symbols, _) = plan.run(|node, z| {
            let (file, path, count) = files
                .get_mut(&node)
                .ok_or_else(|| Error::Internal(format!("repair read from non-helper {node}")))?;
            file.seek(SeekFrom::Start(symbol_offset(&p, sb, stripe, z.0)))
                .and_then(|_| file.read_exact(&mut sym))
                .map_err(CliError::io(&**path))?;
            *count += sb as u64;
            Ok::<_, CliError>(read_symbol(&sym))
        })?;
        buf.clear();
        for v in symbols {
            write_symbol(&mut buf, v, sb);
        }
        w.write_all(&buf).map_err(CliError::io(out))?;
    }
    w.flush().map_err(CliError::io(out))?;

    let mut reads: Vec<(usize, u64)> = files.iter().map(|(n, (_, _, c))| (n.id(p.q), *c)).collect();
    reads.sort_unstable();
    let expected_per_helper = set.header.stripe_count * (p.beta * sb) as u64;
    if let Some((id, bytes)) = reads.iter().find(|r| r.1 != expected_per_helper) {
        return Err(CliError::Code(Error::Internal(format!(
            "helper {id} read {bytes} bytes, expected {expected_per_helper}"
        ))));
    }
    Ok(RepairSummary {
        params: p,
        failed,
        stripes: set.header.stripe_count,
        reads,
        expected_per_helper,
        out: out.to_path_buf(),
    })
}

pub fn verify(
    n: usize,
    k: usize,
    d: usize,
    exhaustive: bool,
    trials: usize,
) -> Result<VerificationReport> {
    let code = MsrCode::new(n, k, d)?;
    let opts = if exhaustive {
        VerifyOptions::exhaustive()
    } else {
        VerifyOptions::default()
    };
    Ok(verify_all(&code, &opts, trials))
}

pub fn params(n: usize, k: usize, d: usize) -> Result<String> {
    let code = MsrCode::new(n, k, d)?;
    let p = code.params();
    let f = code.field();
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k:<8}{v}\n"));
    line("n", p.n.to_string());
    line("k", p.k.to_string());
    line("d", p.d.to_string());
    line("q", p.q.to_string());
    line("t", p.t.to_string());
    line("r", p.r.to_string());
    line("alpha", p.alpha.to_string());
    line("beta", p.beta.to_string());
    line("delta", p.delta.to_string());
    line("m", p.m.to_string());
    line("Q", f.size().to_string());
    line("modulus", format!("{:#x}", f.modulus()));
    line("B", format!("{} symbols per stripe", p.message_len()));
    line(
        "repair",
        format!(
            "{} symbols (d*beta) vs {} for full decode",
            p.repair_bandwidth(),
            p.message_len()
        ),
    );
    if p.is_shortened() {
        s.push_str(&format!(
            "shortened from the ({}, {}) base code: {} virtual node(s) fixed to zero\n",
            p.n_base,
            p.n_base - p.r,
            p.delta
        ));
    }
    Ok(s)
}
