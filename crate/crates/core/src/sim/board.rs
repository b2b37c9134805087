use std::collections::{BTreeMap, VecDeque};

use crate::stdlib;

use super::log::{Event, EventLog};
use super::trace::{PinEvent, TraceScript};

pub const DEFAULT_TICK_MS: u32 = 10;

/// Pins, levels and the clock as the program sees them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualBoard {
    pub pin_modes: BTreeMap<u8, u8>,
    /// Levels seen by `digitalRead`.
    pub pin_levels: BTreeMap<u8, bool>,
    /// Levels last written; every pin starts low.
    pub output_levels: BTreeMap<u8, bool>,
    pub clock_ms: u32,
    pub tick_ms: u32,
    script: VecDeque<PinEvent>,
}

impl VirtualBoard {
    pub fn new(trace: &TraceScript, tick_override: Option<u32>) -> Self {
        VirtualBoard {
            pin_modes: BTreeMap::new(),
            pin_levels: trace.initial.clone(),
            output_levels: BTreeMap::new(),
            clock_ms: 0,
            tick_ms: tick_override.or(trace.tick_ms).unwrap_or(DEFAULT_TICK_MS),
            script: trace.events.iter().copied().collect(),
        }
    }

    /// Sets the clock for loop iteration `step` and applies due pin events.
    pub fn enter_step(&mut self, step: u64) {
        let now = step * self.tick_ms as u64;
        self.clock_ms = now as u32;
        while let Some(e) = self.script.front() {
            if e.time_ms as u64 > now {
                break;
            }
            self.pin_levels.insert(e.pin, e.high);
            self.script.pop_front();
        }
    }

    /// Virtual time at which iteration `step` runs, without wrapping.
    pub fn step_time(&self, step: u64) -> u64 {
        step * self.tick_ms as u64
    }

    pub fn pin_mode(&mut self, pin: i64, mode: i64, log: &mut EventLog) {
        let (pin, mode) = (pin as u8, mode as u8);
        self.pin_modes.insert(pin, mode);
        log.push(Event::PinMode {
            t: self.clock_ms,
            pin,
            mode,
        });
    }

    pub fn digital_write(&mut self, pin: i64, val: i64, log: &mut EventLog) {
        let pin = pin as u8;
        let high = val as u8 != stdlib::LOW as u8;
        if self.pin_modes.get(&pin) != Some(&(stdlib::OUTPUT as u8)) {
            log.push(Event::Warning {
                t: self.clock_ms,
                text: format!("digitalWrite({pin}) on a pin not configured as OUTPUT"),
            });
        }
        let before = self.output_levels.insert(pin, high).unwrap_or(false);
        if before != high {
            log.push(Event::DigitalWrite {
                t: self.clock_ms,
                pin,
                high,
            });
        }
    }

    pub fn digital_read(&mut self, pin: i64, log: &mut EventLog) -> i64 {
        let pin = pin as u8;
        let mode = self.pin_modes.get(&pin).copied();
        if mode != Some(stdlib::INPUT as u8) && mode != Some(stdlib::INPUT_PULLUP as u8) {
            log.push(Event::Warning {
                t: self.clock_ms,
                text: format!("digitalRead({pin}) on a pin not configured as INPUT"),
            });
        }
        let high = self.pin_levels.get(&pin).copied().unwrap_or(false);
        if high {
            stdlib::HIGH
        } else {
            stdlib::LOW
        }
    }

    pub fn millis(&self) -> u32 {
        self.clock_ms
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn board(script: &str) -> VirtualBoard {
        VirtualBoard::new(&TraceScript::parse(script).unwrap(), None)
    }

    #[test]
    fn clock_and_events() {
        let mut b = board("tick 10\nat 500 pin 2 high\nat 505 pin 2 low");
        let mut log = EventLog::default();
        b.pin_mode(2, 0, &mut log);
        b.enter_step(49);
        assert_eq!(b.millis(), 490);
        assert_eq!(b.digital_read(2, &mut log), 0);
        b.enter_step(50);
        assert_eq!(b.digital_read(2, &mut log), 1);
        b.enter_step(51);
        assert_eq!(b.digital_read(2, &mut log), 0);
        assert!(log.warnings().next().is_none());
    }

    #[test]
    fn default_tick_and_override() {
        assert_eq!(board("").tick_ms, DEFAULT_TICK_MS);
        assert_eq!(VirtualBoard::new(&TraceScript::parse("tick 7").unwrap(), Some(3)).tick_ms, 3);
    }

    #[test]
    fn millis_wraps() {
        let mut b = board("tick 1000");
        b.enter_step(4_294_968);
        assert_eq!(b.millis(), (4_294_968_000u64 % (1u64 << 32)) as u32);
    }

    #[test]
    fn writes_logged_on_change_with_warnings() {
        let mut b = board("");
        let mut log = EventLog::default();
        b.digital_write(13, 0, &mut log);
        assert_eq!(log.warnings().count(), 1);
        assert_eq!(log.digital_writes().count(), 0);
        b.pin_mode(13, 1, &mut log);
        b.digital_write(13, 1, &mut log);
        b.digital_write(13, 1, &mut log);
        b.digital_write(269, 0, &mut log); // pin 269 is pin 13 as uint8_t
        assert_eq!(
            log.digital_writes().collect::<Vec<_>>(),
            vec![(0, 13, true), (0, 13, false)]
        );
        b.digital_read(4, &mut log);
        assert_eq!(log.warnings().count(), 2);
    }
}
