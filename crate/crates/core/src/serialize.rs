//! Versioned little-endian binary format for every oracle kind.
//!
//! Layout: `"TZAO"`, version byte, kind byte, then the kind's blob. Vertex ids
//! are `u32` with `u32::MAX` for "none"; reals are IEEE-754 `f64` bits.

use std::collections::HashMap;
use std::path::Path;

use crate::bunch::{BunchOracle, Levels, Mode, Row};
use crate::constructions::{Algo, BuildPlan, BuildReport, CompositeOracle, ExactTable, Far};
use crate::error::{Error, Result};
use crate::graph::{NearestInfo, NONE};
use crate::hado::{x_sequence, Hado, HadoParams};
use crate::param::{ParamOracle, RestrictedParamOracle};

pub const MAGIC: &[u8; 4] = b"TZAO";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleFile {
    Bunch(BunchOracle),
    Hado(Hado),
    Composite(CompositeOracle),
}

impl OracleFile {
    pub fn kind(&self) -> u8 {
        match self {
            OracleFile::Bunch(_) => 0,
            OracleFile::Hado(_) => 1,
            OracleFile::Composite(_) => 2,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            OracleFile::Bunch(o) => o.n(),
            OracleFile::Hado(h) => h.n(),
            OracleFile::Composite(c) => c.n(),
        }
    }

    pub fn query(&self, u: usize, v: usize) -> f64 {
        match self {
            OracleFile::Bunch(o) => o.query(u, v),
            OracleFile::Hado(h) => h.query(u, v),
            OracleFile::Composite(c) => c.query(u, v),
        }
    }

    /// Unconditional `(α, β)`; the hierarchical oracle alone has none.
    pub fn guarantee(&self) -> Option<(f64, f64)> {
        match self {
            OracleFile::Bunch(o) => Some(((2 * o.k() - 1) as f64, 0.0)),
            OracleFile::Hado(_) => None,
            OracleFile::Composite(c) => Some(c.guarantee()),
        }
    }

    pub fn entries(&self) -> usize {
        match self {
            OracleFile::Bunch(o) => o.bunch_entries(),
            OracleFile::Hado(h) => h.entries(),
            OracleFile::Composite(c) => c.entries(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.buf.extend_from_slice(MAGIC);
        w.u8(VERSION);
        w.u8(self.kind());
        match self {
            OracleFile::Bunch(o) => w.bunch(o),
            OracleFile::Hado(h) => w.hado(h),
            OracleFile::Composite(c) => w.composite(c),
        }
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<OracleFile> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let out = match r.u8()? {
            0 => OracleFile::Bunch(r.bunch()?),
            1 => OracleFile::Hado(r.hado()?),
            2 => OracleFile::Composite(r.composite()?),
            kind => return Err(Error::Format(format!("unknown oracle kind {kind}"))),
        };
        if r.pos != bytes.len() {
            return Err(Error::Format("trailing bytes".into()));
        }
        Ok(out)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<OracleFile> {
        OracleFile::from_bytes(&std::fs::read(path)?)
    }
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, x: u8) {
        self.buf.push(x);
    }

    fn u32(&mut self, x: u32) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    fn u64(&mut self, x: u64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    fn f64(&mut self, x: f64) {
        self.u64(x.to_bits());
    }

    fn len(&mut self, x: usize) {
        self.u32(u32::try_from(x).expect("length fits in u32"));
    }

    fn id(&mut self, x: usize) {
        if x == NONE {
            self.u32(u32::MAX);
        } else {
            self.u32(u32::try_from(x).ok().filter(|&v| v != u32::MAX).expect("vertex id fits in u32"));
        }
    }

    fn ids(&mut self, xs: &[usize]) {
        self.len(xs.len());
        for &x in xs {
            self.id(x);
        }
    }

    fn bunch(&mut self, o: &BunchOracle) {
        self.u8(o.mode().tag());
        self.len(o.k());
        self.len(o.n());
        self.u64(o.seed());
        self.len(o.levels().count());
        for set in &o.levels().sets {
            self.ids(set);
        }
        let stored = o.stored_vertices();
        self.len(stored.len());
        for u in stored {
            let row = o.row(u).unwrap();
            self.id(u);
            for &(p, h) in &row.pivots {
                self.id(p);
                self.f64(h);
            }
            let mut entries: Vec<(usize, f64)> = row.bunch.iter().map(|(&w, &d)| (w, d)).collect();
            entries.sort_by_key(|e| e.0);
            self.len(entries.len());
            for (w, d) in entries {
                self.id(w);
                self.f64(d);
            }
        }
    }

    fn hado(&mut self, h: &Hado) {
        let p = h.params();
        self.len(p.k);
        self.f64(p.x0);
        self.len(p.t);
        self.u64(h.seed());
        let nt = h.nearest_t();
        self.len(nt.n());
        for s in h.s_sets() {
            self.ids(s);
        }
        for u in 0..nt.n() {
            self.id(nt.p[u]);
            self.f64(nt.h[u]);
        }
        self.bunch(h.base());
        for level in h.levels() {
            self.bunch(level.inner());
        }
    }

    fn composite(&mut self, c: &CompositeOracle) {
        let plan = c.plan();
        self.u8(plan.algo.tag());
        self.len(plan.k);
        self.f64(plan.x0);
        self.len(plan.k_prime.unwrap_or(0));
        self.len(plan.k_dprime.unwrap_or(0));
        self.u64(plan.seed);
        let (alpha, beta) = plan.guarantee();
        self.f64(alpha);
        self.f64(beta);
        self.hado(c.hado());
        match c.far() {
            Far::Param(o) => {
                self.u8(0);
                self.bunch(o.inner());
            }
            Far::Table(t) => {
                self.u8(1);
                self.ids(t.set());
                for &d in &t.dist {
                    self.f64(d);
                }
            }
            Far::Restricted(o) => {
                self.u8(2);
                self.bunch(o.inner());
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn malformed(what: &str) -> Error {
    Error::Format(what.to_string())
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.buf.len()).ok_or_else(|| malformed("truncated"))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn len(&mut self) -> Result<usize> {
        let len = self.u32()? as usize;
        if len > self.buf.len() {
            return Err(malformed("length exceeds input"));
        }
        Ok(len)
    }

    fn id(&mut self, n: usize) -> Result<usize> {
        let x = self.u32()?;
        if x == u32::MAX {
            return Ok(NONE);
        }
        let x = x as usize;
        if x >= n {
            return Err(malformed("vertex id out of range"));
        }
        Ok(x)
    }

    fn ids(&mut self, n: usize) -> Result<Vec<usize>> {
        let len = self.len()?;
        let out = (0..len).map(|_| self.id(n)).collect::<Result<Vec<_>>>()?;
        if out.contains(&NONE) || out.windows(2).any(|w| w[0] >= w[1]) {
            return Err(malformed("id list not strictly increasing"));
        }
        Ok(out)
    }

    fn bunch(&mut self) -> Result<BunchOracle> {
        let mode = Mode::from_tag(self.u8()?).ok_or_else(|| malformed("unknown bunch mode"))?;
        let k = self.u32()? as usize;
        let n = self.u32()? as usize;
        let seed = self.u64()?;
        let count = self.len()?;
        let sets = (0..count).map(|_| self.ids(n)).collect::<Result<Vec<_>>>()?;
        let levels = Levels::new(sets).map_err(|_| malformed("empty level"))?;
        let stored = self.len()?;
        let mut rows = Vec::with_capacity(stored);
        let mut last = None;
        for _ in 0..stored {
            let u = self.id(n)?;
            if u == NONE || last.is_some_and(|l| l >= u) {
                return Err(malformed("rows not strictly increasing"));
            }
            last = Some(u);
            let pivots = (0..count).map(|_| Ok((self.id(n)?, self.f64()?))).collect::<Result<Vec<_>>>()?;
            let len = self.len()?;
            let mut bunch = HashMap::with_capacity(len);
            for _ in 0..len {
                let w = self.id(n)?;
                bunch.insert(w, self.f64()?);
            }
            rows.push((u, Row { pivots, bunch }));
        }
        Ok(BunchOracle::from_parts(mode, k, n, seed, levels, rows))
    }

    fn hado(&mut self) -> Result<Hado> {
        let k = self.u32()? as usize;
        let x0 = self.f64()?;
        let t = self.u32()? as usize;
        let seed = self.u64()?;
        let xs = x_sequence(k, x0, t).map_err(|e| Error::Format(e.to_string()))?;
        let n = self.len()?;
        let mut s_sets = Vec::with_capacity(t + 1);
        for _ in 0..=t {
            s_sets.push(self.ids(n)?);
        }
        let mut nearest = NearestInfo { members: vec![false; n], h: vec![0.0; n], p: vec![NONE; n] };
        for u in 0..n {
            nearest.p[u] = self.id(n)?;
            nearest.h[u] = self.f64()?;
        }
        for &s in s_sets.last().unwrap() {
            nearest.members[s] = true;
        }
        let base = self.bunch()?;
        let levels = (0..t).map(|_| Ok(ParamOracle::from_inner(self.bunch()?))).collect::<Result<Vec<_>>>()?;
        Ok(Hado {
            params: HadoParams { k, x0, t, xs },
            seed,
            s_sets,
            base,
            levels,
            nearest_t: nearest,
            warnings: Vec::new(),
        })
    }

    fn composite(&mut self) -> Result<CompositeOracle> {
        let algo = Algo::from_tag(self.u8()?).ok_or_else(|| malformed("unknown algorithm tag"))?;
        let k = self.u32()? as usize;
        let x0 = self.f64()?;
        let k_prime = Some(self.u32()? as usize).filter(|&x| x > 0);
        let k_dprime = Some(self.u32()? as usize).filter(|&x| x > 0);
        let seed = self.u64()?;
        let plan = BuildPlan { algo, k, x0, k_prime, k_dprime, seed, notes: Vec::new() };
        let (alpha, beta) = (self.f64()?, self.f64()?);
        if (alpha, beta) != plan.guarantee() {
            return Err(malformed("guarantee does not match the plan"));
        }
        let hado = self.hado()?;
        let far = match self.u8()? {
            0 => Far::Param(ParamOracle::from_inner(self.bunch()?)),
            1 => {
                let set = self.ids(hado.n())?;
                let dist = (0..set.len() * set.len()).map(|_| self.f64()).collect::<Result<Vec<_>>>()?;
                Far::Table(ExactTable { set, dist })
            }
            2 => Far::Restricted(RestrictedParamOracle::from_inner(self.bunch()?)),
            tag => return Err(Error::Format(format!("unknown far component {tag}"))),
        };
        Ok(CompositeOracle { plan, hado, far, report: BuildReport::default() })
    }
}
