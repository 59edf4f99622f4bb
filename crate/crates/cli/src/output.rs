//! Output formatting: machine formats carry 17 significant digits (the
//! contract; they round-trip f64 exactly), human format carries 6.

use std::fmt::Write as _;

/// 17 significant digits; uniquely identifies the double, so parsing and
/// re-emitting is byte-identical.
pub fn fmt_machine(x: f64) -> String {
    format!("{x:.16e}")
}

/// 6 significant digits for human-facing tables.
pub fn fmt_human(x: f64) -> String {
    format!("{x:.5e}")
}

/// Minimal JSON emitter with full control over number formatting.
pub struct Json {
    buf: String,
    needs_comma: Vec<bool>,
}

impl Json {
    pub fn new() -> Self {
        Json {
            buf: String::new(),
            needs_comma: vec![false],
        }
    }

    fn elem(&mut self) {
        if let Some(last) = self.needs_comma.last_mut() {
            if *last {
                self.buf.push(',');
            }
            *last = true;
        }
    }

    pub fn open_obj(&mut self) -> &mut Self {
        self.elem();
        self.buf.push('{');
        self.needs_comma.push(false);
        self
    }

    pub fn close_obj(&mut self) -> &mut Self {
        self.needs_comma.pop();
        self.buf.push('}');
        self
    }

    pub fn open_arr(&mut self) -> &mut Self {
        self.elem();
        self.buf.push('[');
        self.needs_comma.push(false);
        self
    }

    pub fn close_arr(&mut self) -> &mut Self {
        self.needs_comma.pop();
        self.buf.push(']');
        self
    }

    pub fn key(&mut self, name: &str) -> &mut Self {
        self.elem();
        let _ = write!(self.buf, "\"{name}\":");
        if let Some(last) = self.needs_comma.last_mut() {
            *last = false; // the value that follows is part of this element
        }
        self
    }

    pub fn num(&mut self, x: f64) -> &mut Self {
        self.elem();
        self.buf.push_str(&fmt_machine(x));
        self
    }

    pub fn int(&mut self, x: u64) -> &mut Self {
        self.elem();
        let _ = write!(self.buf, "{x}");
        self
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.elem();
        self.buf.push('"');
        for c in s.chars() {
            match c {
                '"' => self.buf.push_str("\\\""),
                '\\' => self.buf.push_str("\\\\"),
                '\n' => self.buf.push_str("\\n"),
                c if (c as u32) < 0x20 => {
                    let _ = write!(self.buf, "\\u{:04x}", c as u32);
                }
                c => self.buf.push(c),
            }
        }
        self.buf.push('"');
        self
    }

    pub fn bool(&mut self, b: bool) -> &mut Self {
        self.elem();
        self.buf.push_str(if b { "true" } else { "false" });
        self
    }

    pub fn finish(mut self) -> String {
        self.buf.push('\n');
        self.buf
    }
}
