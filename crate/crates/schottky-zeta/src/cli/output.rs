//! JSON and CSV output with 17 significant digits for every float.

use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::ser::Formatter;
use std::io;

/// `v` with 17 significant digits in scientific notation; round-trips exactly.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON; non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// CSV with a header row; each row is `s`, `value` and optionally the error.
pub fn csv(header: &[&str], rows: &[(C64, C64, f64)], with_err: bool) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for (s, v, e) in rows {
        let mut cells = vec![format_f64(s.re), format_f64(s.im), format_f64(v.re), format_f64(v.im)];
        if with_err {
            cells.push(format_f64(*e));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
