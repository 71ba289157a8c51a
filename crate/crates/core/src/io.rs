//! CSV output: header row, comma separated, LF endings, 17 significant digits.

use std::io::{self, Write};

/// Round-trip exact formatting of a double (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write equally long numeric columns under `headers`.
pub fn write_columns<W: Write>(mut w: W, headers: &[&str], cols: &[&[f64]]) -> io::Result<()> {
    assert_eq!(headers.len(), cols.len());
    let n = cols.first().map_or(0, |c| c.len());
    assert!(cols.iter().all(|c| c.len() == n), "ragged columns");
    writeln!(w, "{}", headers.join(","))?;
    let mut line = String::new();
    for i in 0..n {
        line.clear();
        for (j, c) in cols.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&fmt_f64(c[i]));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Rows of preformatted cells (for mixed integer and float columns).
pub fn write_rows<W: Write>(mut w: W, headers: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    writeln!(w, "{}", headers.join(","))?;
    for r in rows {
        assert_eq!(r.len(), headers.len());
        writeln!(w, "{}", r.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for &x in &[0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 1.0000907] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }

    #[test]
    fn columns_layout() {
        let mut buf = Vec::new();
        write_columns(&mut buf, &["x", "u"], &[&[0.0, 1.0], &[2.0, 3.0]]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.split('\n').collect();
        assert_eq!(lines[0], "x,u");
        assert_eq!(lines.len(), 4);
        assert!(!s.contains('\r'));
    }
}
