//! Two-buffer packed fact memory.
//!
//! Each buffer is a byte array holding facts back to back from offset 0:
//! a tag byte (the predicate number) followed by the big-endian argument
//! values. `int` values use sign-magnitude. The first zero tag marks the
//! free tail, which is kept zeroed.

use std::fmt;

use thiserror::Error;

use crate::analyzer::CompileLayout;
use crate::model::ValueType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreFault {
    #[error("buffer overflow inserting {predicate}: {used} of {capacity} bytes used, fact needs {needed}")]
    Overflow {
        predicate: String,
        used: usize,
        capacity: usize,
        needed: usize,
    },
    #[error("value {value} of {predicate} cannot be stored as {ty}")]
    Unencodable {
        predicate: String,
        value: i64,
        ty: ValueType,
    },
}

/// Encodes `v` as `t` into `out`, which must be exactly `t.width()` long.
pub fn write_value(t: ValueType, v: i64, out: &mut [u8]) -> Result<(), i64> {
    if !t.can_store(v) {
        return Err(v);
    }
    match t {
        ValueType::Byte => out[0] = v as u8,
        ValueType::Int => {
            let raw = if v < 0 { 0x8000 | (-v) as u16 } else { v as u16 };
            out.copy_from_slice(&raw.to_be_bytes());
        }
        ValueType::UnsignedLong => out.copy_from_slice(&(v as u32).to_be_bytes()),
    }
    Ok(())
}

pub fn encode_value(t: ValueType, v: i64) -> Result<Vec<u8>, i64> {
    let mut out = vec![0; t.width()];
    write_value(t, v, &mut out)?;
    Ok(out)
}

pub fn decode_value(t: ValueType, bytes: &[u8]) -> i64 {
    match t {
        ValueType::Byte => bytes[0] as i64,
        ValueType::Int => {
            let raw = u16::from_be_bytes([bytes[0], bytes[1]]);
            let mag = (raw & 0x7fff) as i64;
            if raw & 0x8000 != 0 {
                -mag
            } else {
                mag
            }
        }
        ValueType::UnsignedLong => u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as i64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Buffer {
    Current,
    Next,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactStore {
    layout: CompileLayout,
    current: Vec<u8>,
    next: Vec<u8>,
}

impl FactStore {
    pub fn new(layout: CompileLayout) -> Self {
        let n = layout.buffer_size;
        FactStore {
            layout,
            current: vec![0; n],
            next: vec![0; n],
        }
    }

    pub fn layout(&self) -> &CompileLayout {
        &self.layout
    }

    pub fn buffer(&self, b: Buffer) -> &[u8] {
        match b {
            Buffer::Current => &self.current,
            Buffer::Next => &self.next,
        }
    }

    fn buffer_mut(&mut self, b: Buffer) -> &mut Vec<u8> {
        match b {
            Buffer::Current => &mut self.current,
            Buffer::Next => &mut self.next,
        }
    }

    fn size_at(&self, buf: &[u8], pos: usize) -> Option<usize> {
        let tag = *buf.get(pos)?;
        if tag == 0 {
            return None;
        }
        Some(
            self.layout
                .by_number(tag)
                .expect("buffer holds only numbered predicates")
                .size,
        )
    }

    /// Bytes in use: offset of the free tail.
    pub fn used(&self, b: Buffer) -> usize {
        let buf = self.buffer(b);
        let mut pos = 0;
        while let Some(size) = self.size_at(buf, pos) {
            pos += size;
        }
        pos
    }

    /// First fact of `pred` at or after `start` whose arguments equal the
    /// `Some` entries of `bound`.
    pub fn find(&self, b: Buffer, pred: usize, bound: &[Option<i64>], start: usize) -> Option<usize> {
        let info = &self.layout.predicates[pred];
        let mut key = vec![0u8; info.size];
        key[0] = info.number;
        for (i, v) in bound.iter().enumerate() {
            if let Some(v) = v {
                let at = info.arg_offset(i);
                // A value the slot cannot hold matches no stored fact.
                write_value(info.arg_types[i], *v, &mut key[at..at + info.arg_types[i].width()]).ok()?;
            }
        }
        let buf = self.buffer(b);
        let mut pos = start;
        while let Some(size) = self.size_at(buf, pos) {
            if buf[pos] == info.number {
                let fact = &buf[pos..pos + size];
                let hit = bound.iter().enumerate().all(|(i, v)| {
                    let at = info.arg_offset(i);
                    let w = info.arg_types[i].width();
                    v.is_none() || fact[at..at + w] == key[at..at + w]
                });
                if hit {
                    return Some(pos);
                }
            }
            pos += size;
        }
        None
    }

    /// Pattern-based lookup by predicate name: one `b` or `f` per argument,
    /// `bound_values` holding the `b` arguments in order.
    pub fn find_fact(
        &self,
        b: Buffer,
        predicate: &str,
        pattern: &str,
        bound_values: &[i64],
        start: usize,
    ) -> Option<usize> {
        let pred = self.layout.index_of(predicate)?;
        let mut values = bound_values.iter();
        let bound: Vec<Option<i64>> = pattern
            .chars()
            .filter(|c| *c != 'x')
            .map(|c| if c == 'b' { values.next().copied() } else { None })
            .collect();
        self.find(b, pred, &bound, start)
    }

    pub fn contains(&self, b: Buffer, pred: usize, args: &[i64]) -> bool {
        let bound: Vec<Option<i64>> = args.iter().map(|v| Some(*v)).collect();
        self.find(b, pred, &bound, 0).is_some()
    }

    /// Reads argument `i` of the fact at `offset`.
    pub fn read_arg(&self, b: Buffer, offset: usize, i: usize) -> i64 {
        let buf = self.buffer(b);
        let info = self.layout.by_number(buf[offset]).expect("offset addresses a fact");
        let at = offset + info.arg_offset(i);
        decode_value(info.arg_types[i], &buf[at..at + info.arg_types[i].width()])
    }

    /// Inserts unless an identical fact exists; returns whether it was added.
    pub fn insert(&mut self, b: Buffer, pred: usize, args: &[i64]) -> Result<bool, StoreFault> {
        let info = &self.layout.predicates[pred];
        let mut bytes = vec![0u8; info.size];
        bytes[0] = info.number;
        for (i, (&v, &t)) in args.iter().zip(&info.arg_types).enumerate() {
            let at = info.arg_offset(i);
            write_value(t, v, &mut bytes[at..at + t.width()]).map_err(|value| {
                StoreFault::Unencodable {
                    predicate: info.name.clone(),
                    value,
                    ty: t,
                }
            })?;
        }
        if self.contains(b, pred, args) {
            return Ok(false);
        }
        let used = self.used(b);
        let capacity = self.layout.buffer_size;
        if used + bytes.len() > capacity {
            return Err(StoreFault::Overflow {
                predicate: info.name.clone(),
                used,
                capacity,
                needed: bytes.len(),
            });
        }
        self.buffer_mut(b)[used..used + bytes.len()].copy_from_slice(&bytes);
        Ok(true)
    }

    pub fn insert_named(&mut self, b: Buffer, predicate: &str, args: &[i64]) -> Result<bool, StoreFault> {
        let pred = self
            .layout
            .index_of(predicate)
            .unwrap_or_else(|| panic!("unknown predicate {predicate}"));
        self.insert(b, pred, args)
    }

    /// Next becomes current; the old current is zeroed and becomes next.
    pub fn switch_buffers(&mut self) {
        std::mem::swap(&mut self.current, &mut self.next);
        self.next.fill(0);
    }

    pub fn clear(&mut self, b: Buffer) {
        self.buffer_mut(b).fill(0);
    }

    /// Every fact in storage order as (predicate index, offset).
    pub fn offsets(&self, b: Buffer) -> Vec<(usize, usize)> {
        let buf = self.buffer(b);
        let mut out = Vec::new();
        let mut pos = 0;
        while let Some(size) = self.size_at(buf, pos) {
            out.push((buf[pos] as usize - 1, pos));
            pos += size;
        }
        out
    }

    /// Decoded facts in storage order.
    pub fn facts(&self, b: Buffer) -> Vec<(usize, Vec<i64>)> {
        self.offsets(b)
            .into_iter()
            .map(|(pred, off)| {
                let n = self.layout.predicates[pred].arity();
                (pred, (0..n).map(|i| self.read_arg(b, off, i)).collect())
            })
            .collect()
    }

    /// The buffer's facts sorted by tag and raw bytes.
    pub fn dump(&self, b: Buffer) -> FactDump<'_> {
        let buf = self.buffer(b);
        let mut entries: Vec<(&[u8], usize, usize)> = self
            .offsets(b)
            .into_iter()
            .map(|(pred, off)| (&buf[off..off + self.layout.predicates[pred].size], pred, off))
            .collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        FactDump {
            store: self,
            buffer: b,
            entries: entries.into_iter().map(|(_, p, o)| (p, o)).collect(),
        }
    }
}

/// Display adaptor: `p(1000), q(42,12)`.
pub struct FactDump<'a> {
    store: &'a FactStore,
    buffer: Buffer,
    entries: Vec<(usize, usize)>,
}

impl fmt::Display for FactDump<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, &(pred, off)) in self.entries.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            let info = &self.store.layout.predicates[pred];
            f.write_str(&info.name)?;
            if info.arity() > 0 {
                f.write_str("(")?;
                for i in 0..info.arity() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}", self.store.read_arg(self.buffer, off, i))?;
                }
                f.write_str(")")?;
            }
        }
        Ok(())
    }
}
