//! The subcommands, as library functions returning reports.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use msrcode::parity::{build_system, find_c0, sufficient_field_size, DEFAULT_SUBSET_CAP};
use msrcode::repair::RepairPlan;
use msrcode::{
    bandwidth_report, encode as encode_stripe, verify_mds, CodeParams, Decoder, Error, FieldElem,
    Message, NodeIndex, ParityCheckSystem,
};
use rand::SeedableRng;

use crate::error::CliError;
use crate::manifest::Manifest;
use crate::pack::{bytes_to_symbols, stripes_for, symbols_to_bytes};
use crate::shard::{shard_file_name, ShardHeader, HEADER_LEN, SYMBOL_BYTES};

pub const PARAMS_FILE: &str = "params.txt";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// Smallest `m` whose field has at least `n` nonzero elements.
pub fn smallest_degree(n: usize) -> u32 {
    (1..=16).find(|&m| (1usize << m) > n).unwrap_or(17)
}

fn check_header_ranges(q: usize, t: usize) -> Result<(), CliError> {
    if q > u8::MAX as usize || t > u8::MAX as usize {
        return Err(CliError::Usage(format!(
            "q={q}, t={t} must fit in one byte each"
        )));
    }
    Ok(())
}

#[derive(Debug)]
pub struct InitReport {
    pub manifest: Manifest,
    pub path: PathBuf,
    /// Field degrees tried before one succeeded.
    pub tried: Vec<u32>,
}

/// Finds `c0` and writes `params.txt` into `out_dir`. Without `m`, starts at
/// the smallest field that fits `n` nodes and grows it until the search
/// succeeds.
pub fn init(q: usize, t: usize, m: Option<u32>, out_dir: &Path) -> Result<InitReport, CliError> {
    check_header_ranges(q, t)?;
    let probe = CodeParams::new(q, t, 16)?;
    let degrees: Vec<u32> = match m {
        Some(m) => vec![m],
        None => (smallest_degree(probe.n)..=16).collect(),
    };
    let mut tried = Vec::new();
    let mut last_err = None;
    for m in degrees {
        tried.push(m);
        let mut p = CodeParams::new(q, t, m)?;
        match find_c0(&p) {
            Ok(c0) => {
                p.set_c0(c0)?;
                let manifest = Manifest::from_params(&p)?;
                std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
                let path = out_dir.join(PARAMS_FILE);
                manifest.save(&path)?;
                return Ok(InitReport {
                    manifest,
                    path,
                    tried,
                });
            }
            Err(e @ Error::SearchExhausted { .. }) => last_err = Some(e),
            Err(e) => return Err(e.into()),
        }
    }
    let e = last_err.unwrap_or(Error::InvalidParams(format!("no field fits q={q}, t={t}")));
    Err(CliError::Usage(format!(
        "{e} (sufficient field size: more than {})",
        sufficient_field_size(&probe)
    )))
}

#[derive(Debug)]
pub struct EncodeReport {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    pub shards: Vec<PathBuf>,
}

/// Stripes `input` into `n` shard files plus a manifest in `out_dir`.
pub fn encode(input: &Path, params: &Path, out_dir: &Path) -> Result<EncodeReport, CliError> {
    let seed = Manifest::load(params)?;
    let p = seed.params()?;
    check_header_ranges(p.q, p.t)?;
    let sys = ParityCheckSystem::new(&p)?;
    let data = std::fs::read(input).map_err(|e| CliError::io(input, e))?;

    let m = p.field.degree();
    let stripes = stripes_for(data.len() as u64, m, p.file_size);
    let stripe_count = u32::try_from(stripes)
        .map_err(|_| CliError::Usage(format!("{stripes} stripes exceed the shard format")))?;
    let mut manifest = seed.clone();
    manifest.stripe_count = Some(stripe_count);
    manifest.file_length = Some(data.len() as u64);
    manifest.checksums.clear();

    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let nodes: Vec<NodeIndex> = p.nodes().collect();
    let mut writers = Vec::with_capacity(p.n);
    let mut paths = Vec::with_capacity(p.n);
    for &nd in &nodes {
        let path = out_dir.join(shard_file_name(nd));
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = ChecksumWriter::new(BufWriter::new(file));
        w.write_all(&manifest.header_for(nd).to_bytes())
            .map_err(|e| CliError::io(&path, e))?;
        writers.push(w);
        paths.push(path);
    }

    let symbols = bytes_to_symbols(&data, m, stripes as usize * p.file_size);
    let mut buf = Vec::with_capacity(p.alpha * SYMBOL_BYTES);
    for stripe in symbols.chunks(p.file_size) {
        let cw = encode_stripe(&Message::new(stripe.to_vec(), &p)?, &sys)?;
        for (i, &nd) in nodes.iter().enumerate() {
            buf.clear();
            for s in cw.node(nd) {
                buf.extend_from_slice(&s.value().to_le_bytes());
            }
            writers[i]
                .write_all(&buf)
                .map_err(|e| CliError::io(&paths[i], e))?;
        }
    }
    for ((w, &nd), path) in writers.into_iter().zip(&nodes).zip(&paths) {
        let sum = w.finish().map_err(|e| CliError::io(path, e))?;
        manifest.checksums.insert(nd, sum);
    }
    let manifest_path = out_dir.join(MANIFEST_FILE);
    manifest.save(&manifest_path)?;
    Ok(EncodeReport {
        manifest,
        manifest_path,
        shards: paths,
    })
}

struct ChecksumWriter<W> {
    inner: W,
    hasher: crc32fast::Hasher,
}

impl<W: Write> ChecksumWriter<W> {
    fn new(inner: W) -> Self {
        ChecksumWriter {
            inner,
            hasher: crc32fast::Hasher::new(),
        }
    }

    fn finish(mut self) -> std::io::Result<u32> {
        self.inner.flush()?;
        Ok(self.hasher.finalize())
    }
}

impl<W: Write> Write for ChecksumWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

fn require_encoded(manifest: &Manifest) -> Result<(u32, u64), CliError> {
    match (manifest.stripe_count, manifest.file_length) {
        (Some(s), Some(l)) => Ok((s, l)),
        _ => Err(CliError::Usage(
            "manifest has no stripe_count/file_length; pass the manifest written by encode".into(),
        )),
    }
}

fn decode_symbols(bytes: &[u8]) -> Vec<FieldElem> {
    bytes
        .chunks_exact(SYMBOL_BYTES)
        .map(|c| FieldElem(u16::from_le_bytes([c[0], c[1]])))
        .collect()
}

fn check_symbols(p: &CodeParams, node: NodeIndex, symbols: &[FieldElem]) -> Result<(), CliError> {
    if let Some(s) = symbols
        .iter()
        .find(|s| s.value() as usize >= p.field.size())
    {
        return Err(CliError::Mismatch(format!(
            "shard {node} holds {s:?}, not an element of GF(2^{})",
            p.field.degree()
        )));
    }
    Ok(())
}

#[derive(Debug)]
pub struct DecodeReport {
    pub stripes: u32,
    pub file_length: u64,
    /// True when only systematic shards were given and no solve was needed.
    pub systematic: bool,
}

/// Rebuilds the original file from exactly `k` shards.
pub fn decode(
    manifest_path: &Path,
    shards: &[PathBuf],
    output: &Path,
) -> Result<DecodeReport, CliError> {
    let manifest = Manifest::load(manifest_path)?;
    let (stripes, file_length) = require_encoded(&manifest)?;
    let p = manifest.params()?;
    if shards.len() != p.k {
        return Err(CliError::Usage(format!(
            "decode needs exactly k={} shards, got {}",
            p.k,
            shards.len()
        )));
    }
    let sys = ParityCheckSystem::new(&p)?;
    let mut contents = Vec::with_capacity(p.k);
    for path in shards {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let header = ShardHeader::from_bytes(&bytes)?;
        manifest.check_header(&header)?;
        let node = NodeIndex::new(header.node_i as usize, header.node_theta as usize, &p)?;
        let expected = *manifest
            .checksums
            .get(&node)
            .ok_or_else(|| CliError::Mismatch(format!("manifest has no checksum for {node}")))?;
        let actual = crc32fast::hash(&bytes);
        if actual != expected {
            return Err(CliError::Checksum {
                node,
                expected,
                actual,
            });
        }
        let body = &bytes[HEADER_LEN..];
        if body.len() != stripes as usize * p.alpha * SYMBOL_BYTES {
            return Err(CliError::Mismatch(format!(
                "shard {node} has the wrong length"
            )));
        }
        let symbols = decode_symbols(body);
        check_symbols(&p, node, &symbols)?;
        contents.push((node, symbols));
    }
    let distinct: BTreeSet<NodeIndex> = contents.iter().map(|(n, _)| *n).collect();
    if distinct.len() != contents.len() {
        return Err(CliError::Usage("the same shard was given twice".into()));
    }
    contents.sort_by_key(|(n, _)| *n);
    let nodes: Vec<NodeIndex> = contents.iter().map(|(n, _)| *n).collect();
    let decoder = Decoder::new(&sys, &nodes)?;

    let mut payload = Vec::with_capacity(stripes as usize * p.file_size);
    for s in 0..stripes as usize {
        let range = s * p.alpha..(s + 1) * p.alpha;
        let per_node: Vec<&[FieldElem]> = contents.iter().map(|(_, c)| &c[range.clone()]).collect();
        payload.extend(decoder.decode(&p, &per_node)?.into_payload());
    }
    let bytes = symbols_to_bytes(&payload, p.field.degree(), file_length as usize);
    std::fs::write(output, bytes).map_err(|e| CliError::io(output, e))?;
    Ok(DecodeReport {
        stripes,
        file_length,
        systematic: decoder.is_systematic(),
    })
}

/// `Read + Seek` wrapper that counts bytes actually delivered and remembers
/// which byte ranges they came from.
#[derive(Debug)]
pub struct CountingReader<R> {
    inner: R,
    pos: u64,
    bytes_read: u64,
    ranges: Option<Vec<(u64, u64)>>,
}

impl<R: Read + Seek> CountingReader<R> {
    pub fn new(inner: R) -> Self {
        CountingReader {
            inner,
            pos: 0,
            bytes_read: 0,
            ranges: None,
        }
    }

    /// Also records every `(offset, len)` read.
    pub fn logging(inner: R) -> Self {
        CountingReader {
            ranges: Some(Vec::new()),
            ..Self::new(inner)
        }
    }

    pub fn bytes_read(&self) -> u64 {
        self.bytes_read
    }

    pub fn ranges(&self) -> Option<&[(u64, u64)]> {
        self.ranges.as_deref()
    }
}

impl<R: Read> Read for CountingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let n = self.inner.read(buf)?;
        if let Some(r) = &mut self.ranges {
            match r.last_mut() {
                Some((off, len)) if *off + *len == self.pos => *len += n as u64,
                _ => r.push((self.pos, n as u64)),
            }
        }
        self.pos += n as u64;
        self.bytes_read += n as u64;
        Ok(n)
    }
}

impl<R: Seek> Seek for CountingReader<R> {
    fn seek(&mut self, to: SeekFrom) -> std::io::Result<u64> {
        self.pos = self.inner.seek(to)?;
        Ok(self.pos)
    }
}

#[derive(Debug, Clone)]
pub struct HelperTraffic {
    pub node: NodeIndex,
    pub bytes_read: u64,
    pub ranges: Option<Vec<(u64, u64)>>,
}

#[derive(Debug, Clone)]
pub struct RepairReport {
    pub node: NodeIndex,
    pub stripes: u32,
    pub helpers: Vec<HelperTraffic>,
    /// Bytes a decode-then-re-encode repair would fetch: `k` whole shards.
    pub naive_bytes: u64,
    pub checksum: u32,
}

impl RepairReport {
    pub fn total_bytes(&self) -> u64 {
        self.helpers.iter().map(|h| h.bytes_read).sum()
    }
}

impl fmt::Display for RepairReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "repaired node {} ({} stripes)", self.node, self.stripes)?;
        for h in &self.helpers {
            writeln!(f, "  helper {}: {} bytes", h.node, h.bytes_read)?;
        }
        let total = self.total_bytes();
        writeln!(f, "  total read:    {total} bytes")?;
        writeln!(f, "  naive decode:  {} bytes", self.naive_bytes)?;
        write!(
            f,
            "  ratio:         {:.4}",
            total as f64 / self.naive_bytes.max(1) as f64
        )
    }
}

/// Contiguous runs `(start, len)` in a sorted list of row ordinals.
fn runs(rows: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &r in rows {
        match out.last_mut() {
            Some((s, l)) if *s + *l == r => *l += 1,
            _ => out.push((r, 1)),
        }
    }
    out
}

/// Rebuilds the shard of `failed` from `d` helper streams, reading only the
/// header and the helper-row symbols of each. Returns the complete shard
/// bytes and the traffic report.
pub fn repair_from_readers<R: Read + Seek>(
    manifest: &Manifest,
    failed: NodeIndex,
    helpers: Vec<CountingReader<R>>,
) -> Result<(Vec<u8>, RepairReport), CliError> {
    let (stripes, _) = require_encoded(manifest)?;
    let p = manifest.params()?;
    let failed = NodeIndex::new(failed.class, failed.theta, &p)?;
    if helpers.len() != p.d {
        return Err(CliError::Usage(format!(
            "repair needs d={} helper shards, got {}",
            p.d,
            helpers.len()
        )));
    }
    let sys = ParityCheckSystem::new(&p)?;
    let plan = RepairPlan::new(&sys, failed)?;

    let mut slots: Vec<Option<CountingReader<R>>> = (0..p.d).map(|_| None).collect();
    for mut r in helpers {
        let mut hb = [0u8; HEADER_LEN];
        r.seek(SeekFrom::Start(0))
            .and_then(|_| r.read_exact(&mut hb))
            .map_err(|e| CliError::io(Path::new("<helper>"), e))?;
        let header = ShardHeader::from_bytes(&hb)?;
        manifest.check_header(&header)?;
        let node = header.node();
        if node == failed {
            return Err(CliError::Usage(format!(
                "helper shard {node} is the failed node"
            )));
        }
        let slot = plan
            .helpers()
            .iter()
            .position(|&h| h == node)
            .ok_or_else(|| CliError::Usage(format!("helper {node} is not a node of this code")))?;
        if slots[slot].is_some() {
            return Err(CliError::Usage(format!("helper shard {node} given twice")));
        }
        slots[slot] = Some(r);
    }
    let mut readers: Vec<CountingReader<R>> = slots
        .into_iter()
        .map(|s| s.expect("all d present"))
        .collect();

    let gamma_runs = runs(plan.gamma());
    let mut shard = Vec::with_capacity(HEADER_LEN + stripes as usize * p.alpha * SYMBOL_BYTES);
    shard.extend_from_slice(&manifest.header_for(failed).to_bytes());
    let mut packets: Vec<Vec<FieldElem>> = vec![Vec::with_capacity(p.beta); p.d];
    let mut buf = vec![0u8; p.beta * SYMBOL_BYTES];
    for s in 0..stripes as u64 {
        for (slot, r) in readers.iter_mut().enumerate() {
            let pkt = &mut packets[slot];
            pkt.clear();
            for &(start, len) in &gamma_runs {
                let bytes = &mut buf[..len * SYMBOL_BYTES];
                r.seek(SeekFrom::Start(ShardHeader::symbol_offset(
                    p.alpha, s, start,
                )))
                .and_then(|_| r.read_exact(bytes))
                .map_err(|e| CliError::io(Path::new("<helper>"), e))?;
                pkt.extend(decode_symbols(bytes));
            }
            check_symbols(&p, plan.helpers()[slot], pkt)?;
        }
        let refs: Vec<&[FieldElem]> = packets.iter().map(Vec::as_slice).collect();
        for v in plan.execute(&p, &refs)? {
            shard.extend_from_slice(&v.value().to_le_bytes());
        }
    }

    let checksum = crc32fast::hash(&shard);
    let shard_len = (HEADER_LEN + stripes as usize * p.alpha * SYMBOL_BYTES) as u64;
    let report = RepairReport {
        node: failed,
        stripes,
        helpers: plan
            .helpers()
            .iter()
            .zip(&readers)
            .map(|(&node, r)| HelperTraffic {
                node,
                bytes_read: r.bytes_read(),
                ranges: r.ranges().map(<[_]>::to_vec),
            })
            .collect(),
        naive_bytes: p.k as u64 * shard_len,
        checksum,
    };
    Ok((shard, report))
}

/// File-level repair: reads the helper shards by path, checks the rebuilt
/// shard against the manifest checksum and writes it to `output`.
pub fn repair(
    manifest_path: &Path,
    failed: NodeIndex,
    helper_paths: &[PathBuf],
    output: &Path,
) -> Result<RepairReport, CliError> {
    let manifest = Manifest::load(manifest_path)?;
    let readers = helper_paths
        .iter()
        .map(|path| {
            File::open(path)
                .map(CountingReader::new)
                .map_err(|e| CliError::io(path, e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (shard, report) = repair_from_readers(&manifest, failed, readers)?;
    if let Some(&expected) = manifest.checksums.get(&report.node) {
        if expected != report.checksum {
            return Err(CliError::Checksum {
                node: report.node,
                expected,
                actual: report.checksum,
            });
        }
    }
    std::fs::write(output, shard).map_err(|e| CliError::io(output, e))?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub subsets_checked: usize,
    pub rank_failure: Option<Vec<NodeIndex>>,
    pub mds: Option<msrcode::MdsReport>,
    pub error: Option<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.rank_failure.is_none()
            && self.mds.as_ref().is_none_or(|r| r.passed())
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(e) = &self.error {
            return write!(f, "FAIL: {e}");
        }
        match &self.rank_failure {
            Some(s) => writeln!(f, "rank check: FAIL, subset {s:?} is rank deficient")?,
            None => writeln!(f, "rank check: {} subsets full rank", self.subsets_checked)?,
        }
        if let Some(m) = &self.mds {
            writeln!(
                f,
                "decode check: {} subsets x {} messages, {} failures",
                m.subsets, m.trials, m.failures
            )?;
        }
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Rank checks over all `q`-node subsets, then `trials` random round trips
/// through every `k`-subset.
pub fn verify(manifest_path: &Path, trials: usize, seed: u64) -> Result<VerifyReport, CliError> {
    let manifest = Manifest::load(manifest_path)?;
    Ok(verify_manifest(&manifest, trials, seed))
}

pub fn verify_manifest(manifest: &Manifest, trials: usize, seed: u64) -> VerifyReport {
    let failed = |e: String| VerifyReport {
        subsets_checked: 0,
        rank_failure: None,
        mds: None,
        error: Some(e),
    };
    let p = match manifest.params() {
        Ok(p) => p,
        Err(e) => return failed(e.to_string()),
    };
    let sys = match build_system(&p, p.c0().expect("set by params()")) {
        Ok(s) => s,
        Err(e) => return failed(e.to_string()),
    };
    let rank_failure = match sys.first_rank_deficient_subset(DEFAULT_SUBSET_CAP) {
        Ok(r) => r,
        Err(e) => return failed(e.to_string()),
    };
    let subsets_checked = msrcode::parity::binomial(p.n as u128, p.q as u128) as usize;
    let mds = (trials > 0).then(|| {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        verify_mds(&sys, trials, &mut rng)
    });
    VerifyReport {
        subsets_checked,
        rank_failure,
        mds,
        error: None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub q: usize,
    pub t: usize,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub alpha: usize,
    pub beta: usize,
    pub file_size: usize,
    pub rate: f64,
    pub repair_bandwidth: usize,
    pub repair_ratio: f64,
    /// `(k / t)^t`.
    pub alpha_k_over_t: f64,
    /// `(k / (t - 1))^t`, equal to `alpha` for this construction.
    pub alpha_k_over_t_minus_one: f64,
}

pub fn stats(p: &CodeParams) -> StatsReport {
    let bw = bandwidth_report(p);
    let (k, t) = (p.k as f64, p.t as f64);
    StatsReport {
        q: p.q,
        t: p.t,
        n: p.n,
        k: p.k,
        d: p.d,
        alpha: p.alpha,
        beta: p.beta,
        file_size: p.file_size,
        rate: p.rate(),
        repair_bandwidth: bw.total,
        repair_ratio: bw.ratio,
        alpha_k_over_t: (k / t).powi(p.t as i32),
        alpha_k_over_t_minus_one: (k / (t - 1.0)).powi(p.t as i32),
    }
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "q            {}", self.q)?;
        writeln!(f, "t            {}", self.t)?;
        writeln!(f, "n            {}", self.n)?;
        writeln!(f, "k            {}", self.k)?;
        writeln!(f, "d            {}", self.d)?;
        writeln!(f, "alpha        {}", self.alpha)?;
        writeln!(f, "beta         {}", self.beta)?;
        writeln!(f, "B            {}", self.file_size)?;
        writeln!(
            f,
            "rate         {:.4}  ((t-1)/t = {}/{})",
            self.rate,
            self.t - 1,
            self.t
        )?;
        writeln!(f, "d*beta       {}", self.repair_bandwidth)?;
        writeln!(f, "d*beta/B     {:.4}", self.repair_ratio)?;
        writeln!(f, "(k/t)^t      {:.4}", self.alpha_k_over_t)?;
        write!(f, "(k/(t-1))^t  {:.4}", self.alpha_k_over_t_minus_one)
    }
}
