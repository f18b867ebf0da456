//! Bit-stable CSV output: fixed column order, 17 significant digits, LF.

use std::io::Write;

use crate::error::Result;

/// Float with 17 significant digits in scientific notation.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a header and rows of floats.
pub fn write_rows<W, I>(mut w: W, header: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator,
    I::Item: AsRef<[f64]>,
{
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|v| float(*v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(float(0.1), "1.0000000000000001e-1");
        assert_eq!(float(1.0).parse::<f64>().unwrap(), 1.0);
        let v = std::f64::consts::PI;
        assert_eq!(float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn header_only_and_rows() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &["x", "t", "u"], Vec::<[f64; 3]>::new()).unwrap();
        assert_eq!(buf, b"x,t,u\n");
        let mut buf = Vec::new();
        write_rows(&mut buf, &["a"], [[1.0], [2.0]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }
}
