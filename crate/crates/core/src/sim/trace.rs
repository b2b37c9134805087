//! Scripted environment for a simulation run.
//!
//! ```text
//! # touch sensor pressed for one second
//! tick 10
//! pin 2 low
//! at 500 pin 2 high
//! at 1500 pin 2 low
//! end 2000
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct TraceError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PinEvent {
    pub time_ms: u32,
    pub pin: u8,
    pub high: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceScript {
    pub tick_ms: Option<u32>,
    /// Levels before any event; unlisted pins read low.
    pub initial: BTreeMap<u8, bool>,
    /// Sorted by time; events at equal times keep file order.
    pub events: Vec<PinEvent>,
    pub end_ms: Option<u32>,
}

impl TraceScript {
    pub fn parse(text: &str) -> Result<TraceScript, TraceError> {
        let mut t = TraceScript::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| TraceError { line, message };
            let words: Vec<&str> = content.split_whitespace().collect();
            match words.as_slice() {
                ["tick", ms] => {
                    if t.tick_ms.is_some() {
                        return Err(err("duplicate `tick`".into()));
                    }
                    let ms = number(ms).map_err(err)?;
                    if ms == 0 {
                        return Err(err("tick must be at least 1 ms".into()));
                    }
                    t.tick_ms = Some(ms);
                }
                ["end", ms] => {
                    if t.end_ms.is_some() {
                        return Err(err("duplicate `end`".into()));
                    }
                    t.end_ms = Some(number(ms).map_err(err)?);
                }
                ["pin", pin, level] => {
                    let pin = pin_number(pin).map_err(err)?;
                    let high = level_word(level).map_err(err)?;
                    t.initial.insert(pin, high);
                }
                ["at", ms, "pin", pin, level] => {
                    let time_ms = number(ms).map_err(err)?;
                    let pin = pin_number(pin).map_err(err)?;
                    let high = level_word(level).map_err(err)?;
                    t.events.push(PinEvent { time_ms, pin, high });
                }
                _ => return Err(err(format!("cannot parse `{content}`"))),
            }
        }
        t.events.sort_by_key(|e| e.time_ms);
        Ok(t)
    }
}

fn number(s: &str) -> Result<u32, String> {
    s.parse::<u32>()
        .map_err(|_| format!("expected milliseconds, found `{s}`"))
}

fn pin_number(s: &str) -> Result<u8, String> {
    s.parse::<u8>()
        .map_err(|_| format!("expected a pin number 0-255, found `{s}`"))
}

fn level_word(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "high" => Ok(true),
        "low" => Ok(false),
        _ => Err(format!("expected `high` or `low`, found `{s}`")),
    }
}
