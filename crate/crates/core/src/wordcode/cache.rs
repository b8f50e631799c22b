//! On-disk cache for compiled plans.
//!
//! Layout (little endian): magic, format version, word size, profile, code,
//! alphabet kind, alphabet checksum, then per step the state dictionary and
//! the transition rows, and finally a SHA-256 of everything before it.

use std::fs;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::plan::{alphabet_checksum, CompositionPlan, HashWriter, PlanOptions};
use super::CodeKind;
use crate::alphabet::{Alphabet, AlphabetKind, BoundaryProfile};
use crate::error::{Error, Result};

pub const CACHE_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"PCBPLAN\0";

/// `$PCBOUNDS_CACHE_DIR`, else `$XDG_CACHE_HOME/pcbounds`, else
/// `~/.cache/pcbounds`.
pub fn default_cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os("PCBOUNDS_CACHE_DIR") {
        return PathBuf::from(dir);
    }
    if let Some(dir) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(dir).join("pcbounds");
    }
    match std::env::var_os("HOME") {
        Some(home) => PathBuf::from(home).join(".cache").join("pcbounds"),
        None => std::env::temp_dir().join("pcbounds"),
    }
}

fn code_tag(code: CodeKind) -> u8 {
    match code {
        CodeKind::Weak => 0,
        CodeKind::Strong => 1,
        CodeKind::StrongAllSides => 2,
        CodeKind::EmbeddedM2Via4 => 3,
    }
}

fn code_from_tag(tag: u8) -> Option<CodeKind> {
    Some(match tag {
        0 => CodeKind::Weak,
        1 => CodeKind::Strong,
        2 => CodeKind::StrongAllSides,
        3 => CodeKind::EmbeddedM2Via4,
        _ => return None,
    })
}

fn kind_tag(kind: AlphabetKind) -> u8 {
    match kind {
        AlphabetKind::Full => 0,
        AlphabetKind::Extremes => 1,
        AlphabetKind::Subset => 2,
    }
}

fn kind_from_tag(tag: u8) -> Option<AlphabetKind> {
    Some(match tag {
        0 => AlphabetKind::Full,
        1 => AlphabetKind::Extremes,
        2 => AlphabetKind::Subset,
        _ => return None,
    })
}

fn put_u32<W: Write>(w: &mut W, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub(crate) fn write_body<W: Write>(plan: &CompositionPlan, w: &mut W) -> io::Result<()> {
    w.write_all(MAGIC)?;
    put_u32(w, CACHE_FORMAT_VERSION)?;
    put_u32(w, plan.m as u32)?;
    let p = plan.profile;
    for v in [p.left, p.top, p.right, p.bottom] {
        put_u32(w, v as u32)?;
    }
    w.write_all(&[code_tag(plan.code), kind_tag(plan.alphabet_kind)])?;
    put_u32(w, plan.letters as u32)?;
    w.write_all(&plan.alphabet_checksum)?;
    put_u32(w, plan.tables.len() as u32)?;
    for (s, table) in plan.tables.iter().enumerate() {
        let states = &plan.states[s];
        put_u32(w, states.len() as u32)?;
        for key in states {
            put_u32(w, key.len() as u32)?;
            w.write_all(key)?;
        }
        let mut buf = Vec::with_capacity(table.len() * 4);
        for &v in table {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

struct HashingReader<R> {
    inner: R,
    hasher: Sha256,
}

impl<R: Read> HashingReader<R> {
    fn take(&mut self, n: usize) -> io::Result<Vec<u8>> {
        let mut buf = vec![0u8; n];
        self.inner.read_exact(&mut buf)?;
        self.hasher.update(&buf);
        Ok(buf)
    }

    fn u32(&mut self) -> io::Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u8(&mut self) -> io::Result<u8> {
        Ok(self.take(1)?[0])
    }
}

impl CompositionPlan {
    /// Writes the plan atomically (temporary file then rename).
    pub fn save(&self, path: &Path) -> Result<()> {
        let cache_err = |e: io::Error| Error::Cache { path: path.display().to_string(), reason: e.to_string() };
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(cache_err)?;
        }
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let f = fs::File::create(&tmp).map_err(cache_err)?;
            let mut w = BufWriter::new(f);
            let mut h = Sha256::new();
            {
                let mut tee = Tee { a: &mut w, b: HashWriter(&mut h) };
                write_body(self, &mut tee).map_err(cache_err)?;
            }
            let digest: [u8; 32] = h.finalize().into();
            w.write_all(&digest).map_err(cache_err)?;
            w.flush().map_err(cache_err)?;
        }
        fs::rename(&tmp, path).map_err(cache_err)?;
        Ok(())
    }

    /// Reads a plan, rejecting truncated, corrupted or stale files.
    pub fn load(path: &Path) -> Result<CompositionPlan> {
        let bad = |reason: String| Error::Cache { path: path.display().to_string(), reason };
        let f = fs::File::open(path).map_err(|e| bad(e.to_string()))?;
        let mut r = HashingReader { inner: BufReader::new(f), hasher: Sha256::new() };
        let io = |e: io::Error| bad(format!("truncated or unreadable: {e}"));
        if r.take(8).map_err(io)? != MAGIC {
            return Err(bad("not a plan cache file".into()));
        }
        let version = r.u32().map_err(io)?;
        if version != CACHE_FORMAT_VERSION {
            return Err(bad(format!("format version {version}, expected {CACHE_FORMAT_VERSION}")));
        }
        let m = r.u32().map_err(io)? as usize;
        let mut sides = [0usize; 4];
        for v in &mut sides {
            *v = r.u32().map_err(io)? as usize;
        }
        let profile = BoundaryProfile::new(sides[0], sides[1], sides[2], sides[3]).map_err(|e| bad(e.to_string()))?;
        let code = code_from_tag(r.u8().map_err(io)?).ok_or_else(|| bad("unknown code tag".into()))?;
        let alphabet_kind = kind_from_tag(r.u8().map_err(io)?).ok_or_else(|| bad("unknown alphabet tag".into()))?;
        let letters = r.u32().map_err(io)? as usize;
        let mut alphabet_sum = [0u8; 32];
        alphabet_sum.copy_from_slice(&r.take(32).map_err(io)?);
        let steps = r.u32().map_err(io)? as usize;
        if m == 0 || steps != m * m || letters == 0 {
            return Err(bad("inconsistent header".into()));
        }
        let mut states = Vec::with_capacity(steps);
        let mut tables = Vec::with_capacity(steps);
        for s in 0..steps {
            let count = r.u32().map_err(io)? as usize;
            let mut dict = Vec::with_capacity(count);
            for _ in 0..count {
                let len = r.u32().map_err(io)? as usize;
                if len > 4096 {
                    return Err(bad("oversized state key".into()));
                }
                dict.push(r.take(len).map_err(io)?.into_boxed_slice());
            }
            let raw = r.take(count * letters * 4).map_err(io)?;
            let table: Vec<u32> = raw.chunks_exact(4).map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect();
            let bound = if s + 1 == steps { letters } else { usize::MAX };
            if table.iter().any(|&v| v as usize >= bound) {
                return Err(bad("output id out of range".into()));
            }
            states.push(dict);
            tables.push(table);
        }
        let body_digest: [u8; 32] = r.hasher.clone().finalize().into();
        let mut trailer = [0u8; 32];
        r.inner.read_exact(&mut trailer).map_err(io)?;
        if trailer != body_digest {
            return Err(bad("checksum mismatch".into()));
        }
        let mut extra = [0u8; 1];
        if r.inner.read(&mut extra).map_err(io)? != 0 {
            return Err(bad("trailing bytes".into()));
        }
        for s in 0..steps.saturating_sub(1) {
            let next = states[s + 1].len();
            if tables[s].iter().any(|&v| v as usize >= next) {
                return Err(bad("state id out of range".into()));
            }
        }
        states.truncate(steps);
        Ok(CompositionPlan {
            m,
            profile,
            code,
            alphabet_kind,
            letters,
            alphabet_checksum: alphabet_sum,
            states,
            tables,
            checksum: body_digest,
        })
    }

    /// File name used for a configuration inside a cache directory.
    pub fn cache_file_name(alphabet: &Alphabet, m: usize, code: CodeKind) -> String {
        let mut h = Sha256::new();
        h.update(CACHE_FORMAT_VERSION.to_le_bytes());
        h.update((m as u32).to_le_bytes());
        h.update([code_tag(code), kind_tag(alphabet.kind())]);
        h.update(alphabet_checksum(alphabet));
        let digest = h.finalize();
        let p = alphabet.profile();
        format!(
            "plan-{}-{}{}{}{}-m{}-{}.bin",
            code.name(),
            p.left,
            p.top,
            p.right,
            p.bottom,
            m,
            &hex::encode(digest)[..16]
        )
    }

    /// Loads a cached plan from `dir` when present and valid, otherwise
    /// builds it and stores it there.
    pub fn load_or_build(
        alphabet: &Alphabet,
        m: usize,
        code: CodeKind,
        dir: Option<&Path>,
        opts: &PlanOptions,
    ) -> Result<CompositionPlan> {
        let Some(dir) = dir else {
            return CompositionPlan::build(alphabet, m, code, opts);
        };
        let path = dir.join(Self::cache_file_name(alphabet, m, code));
        if path.exists() {
            match Self::load(&path) {
                Ok(plan) if plan.matches(alphabet) && plan.m == m && plan.code == code => return Ok(plan),
                Ok(_) => {
                    if opts.verbose {
                        eprintln!("cache {} does not match, rebuilding", path.display());
                    }
                }
                Err(e) => {
                    if opts.verbose {
                        eprintln!("{e}; rebuilding");
                    }
                }
            }
        }
        let plan = CompositionPlan::build(alphabet, m, code, opts)?;
        plan.save(&path)?;
        Ok(plan)
    }
}

struct Tee<'a, A: Write> {
    a: &'a mut A,
    b: HashWriter<'a>,
}

impl<A: Write> Write for Tee<'_, A> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.a.write_all(buf)?;
        self.b.write_all(buf)?;
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        self.a.flush()
    }
}
