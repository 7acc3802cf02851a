//! Minimal CSV emission with shortest round-trip float formatting.

/// Shortest decimal string that parses back to exactly `x`.
pub fn fmt_float(x: f64) -> String {
    let mut b = ryu::Buffer::new();
    b.format(x).to_string()
}

#[derive(Debug, Clone)]
pub struct Csv {
    buf: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self {
            buf,
            width: header.len(),
        }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        assert_eq!(fields.len(), self.width, "CSV row width");
        let mut first = true;
        for f in fields {
            if !first {
                self.buf.push(',');
            }
            first = false;
            self.buf.push_str(f.as_ref());
        }
        self.buf.push('\n');
    }

    pub fn row_f64(&mut self, values: &[f64]) {
        let fields: Vec<String> = values.iter().map(|&v| fmt_float(v)).collect();
        self.row(&fields);
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, std::f64::consts::TAU, 1e300] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(2.0), "2.0");
    }

    #[test]
    fn header_and_rows() {
        let mut c = Csv::new(&["t", "x"]);
        c.row_f64(&[0.0, 0.5]);
        c.row(&["1.0", "abc"]);
        assert_eq!(c.finish(), "t,x\n0.0,0.5\n1.0,abc\n");
    }
}
