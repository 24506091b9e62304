//! Text formatting shared by every CSV writer.

/// 17 significant digits in scientific notation, `.` decimal separator.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Parses a comma separated list, ignoring surrounding whitespace and empty items.
pub fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>, T::Err> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<u64>("4, 16,64").unwrap(), vec![4, 16, 64]);
        assert_eq!(parse_list::<f64>("").unwrap(), Vec::<f64>::new());
        assert!(parse_list::<u64>("4,x").is_err());
    }
}
