use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Event {
    PinMode { t: u32, pin: u8, mode: u8 },
    DigitalWrite { t: u32, pin: u8, high: bool },
    Warning { t: u32, text: String },
    Fault { t: u32, text: String },
    /// Start of a loop iteration; not part of the printed log.
    StepMarker { step: u64, t: u32 },
}

pub fn mode_name(mode: u8) -> String {
    match mode {
        0 => "INPUT".into(),
        1 => "OUTPUT".into(),
        2 => "INPUT_PULLUP".into(),
        m => m.to_string(),
    }
}

impl Event {
    pub fn time(&self) -> u32 {
        match self {
            Event::PinMode { t, .. }
            | Event::DigitalWrite { t, .. }
            | Event::Warning { t, .. }
            | Event::Fault { t, .. }
            | Event::StepMarker { t, .. } => *t,
        }
    }

    /// The printed line, or `None` for step markers.
    pub fn line(&self) -> Option<String> {
        Some(match self {
            Event::PinMode { t, pin, mode } => {
                format!("[t={t}] pinMode({pin}, {})", mode_name(*mode))
            }
            Event::DigitalWrite { t, pin, high } => {
                let level = if *high { "HIGH" } else { "LOW" };
                format!("[t={t}] digitalWrite({pin}, {level})")
            }
            Event::Warning { t, text } => format!("[t={t}] WARN {text}"),
            Event::Fault { t, text } => format!("[t={t}] FAULT {text}"),
            Event::StepMarker { .. } => return None,
        })
    }
}

/// Everything observable about a run, in execution order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    pub events: Vec<Event>,
}

impl EventLog {
    pub fn push(&mut self, e: Event) {
        self.events.push(e);
    }

    /// Writes to a digital pin, as (time, pin, level).
    pub fn digital_writes(&self) -> impl Iterator<Item = (u32, u8, bool)> + '_ {
        self.events.iter().filter_map(|e| match e {
            Event::DigitalWrite { t, pin, high } => Some((*t, *pin, *high)),
            _ => None,
        })
    }

    pub fn fault(&self) -> Option<&str> {
        self.events.iter().find_map(|e| match e {
            Event::Fault { text, .. } => Some(text.as_str()),
            _ => None,
        })
    }

    pub fn warnings(&self) -> impl Iterator<Item = &str> {
        self.events.iter().filter_map(|e| match e {
            Event::Warning { text, .. } => Some(text.as_str()),
            _ => None,
        })
    }
}

impl fmt::Display for EventLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.events.iter().filter_map(Event::line) {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_formats() {
        let mut log = EventLog::default();
        log.push(Event::StepMarker { step: 0, t: 0 });
        log.push(Event::PinMode { t: 0, pin: 2, mode: 0 });
        log.push(Event::PinMode { t: 0, pin: 13, mode: 1 });
        log.push(Event::DigitalWrite { t: 1020, pin: 13, high: true });
        log.push(Event::Warning { t: 5, text: "x".into() });
        log.push(Event::Fault { t: 6, text: "y".into() });
        assert_eq!(
            log.to_string(),
            "[t=0] pinMode(2, INPUT)\n[t=0] pinMode(13, OUTPUT)\n[t=1020] digitalWrite(13, HIGH)\n[t=5] WARN x\n[t=6] FAULT y\n"
        );
        assert_eq!(log.fault(), Some("y"));
    }
}
