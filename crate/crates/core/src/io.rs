//! CSV dialect shared by every exporter: UTF-8, `\n` line endings, `.` as
//! decimal separator, floats with 17 significant digits in scientific form.

use std::io::{self, Write};

/// Formats a float with 17 significant digits (round-trip exact).
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // Avoid "-0.0000000000000000e0" so reruns and platforms agree.
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

/// Writes `# ` prefixed comment lines.
pub fn write_comments<W: Write>(w: &mut W, lines: &[String]) -> io::Result<()> {
    for l in lines {
        writeln!(w, "# {l}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 1e-300, std::f64::consts::PI] {
            let s = fmt_f64(x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(-0.0), fmt_f64(0.0));
    }
}
