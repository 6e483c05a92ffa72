use num_bigint::BigInt;
use thiserror::Error;

use crate::value::Int;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixedPointError {
    #[error("`{0}` is not a decimal numeral")]
    NotANumeral(String),
    #[error("`{text}` has more fractional digits than scale {scale} allows")]
    Precision { text: String, scale: u64 },
    #[error("scale {0} is not a power of ten")]
    BadScale(u64),
}

/// Number of decimal digits a power-of-ten scale represents.
pub fn scale_digits(scale: u64) -> Result<usize, FixedPointError> {
    let mut s = scale;
    let mut digits = 0;
    while s > 1 && s.is_multiple_of(10) {
        s /= 10;
        digits += 1;
    }
    if s == 1 {
        Ok(digits)
    } else {
        Err(FixedPointError::BadScale(scale))
    }
}

/// Converts a decimal numeral `-?digits(.digits)?` to the exact integer
/// `numeral * scale`. Surrounding whitespace is ignored.
pub fn to_fixed_point(text: &str, scale: u64) -> Result<Int, FixedPointError> {
    let digits = scale_digits(scale)?;
    let t = text.trim();
    let bad = || FixedPointError::NotANumeral(text.to_string());
    let (negative, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if whole.is_empty() || !all_digits(whole) || !all_digits(frac) || (body.contains('.') && frac.is_empty()) {
        return Err(bad());
    }
    let significant = frac.trim_end_matches('0');
    if significant.len() > digits {
        return Err(FixedPointError::Precision {
            text: text.to_string(),
            scale,
        });
    }
    let mut repr = String::with_capacity(whole.len() + digits + 1);
    if negative {
        repr.push('-');
    }
    repr.push_str(whole);
    repr.push_str(significant);
    repr.extend(std::iter::repeat_n('0', digits - significant.len()));
    let n: BigInt = repr.parse().map_err(|_| bad())?;
    Ok(Int::from_big(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_examples() {
        assert_eq!(to_fixed_point("3.142", 1000), Ok(Int::from(3142)));
        assert_eq!(to_fixed_point("-0.5", 10), Ok(Int::from(-5)));
        assert!(matches!(
            to_fixed_point("1.2345", 1000),
            Err(FixedPointError::Precision { .. })
        ));
    }

    #[test]
    fn edge_cases() {
        assert_eq!(to_fixed_point("42", 1), Ok(Int::from(42)));
        assert_eq!(to_fixed_point(" 7 ", 100), Ok(Int::from(700)));
        assert_eq!(to_fixed_point("1.2300", 100), Ok(Int::from(123)));
        assert_eq!(to_fixed_point("-0", 1), Ok(Int::from(0)));
        assert!(to_fixed_point("99999999999999999999", 1000).unwrap() > Int::from(i64::MAX));
        for bad in ["", "-", ".5", "1.", "1e3", "+1", "1.2.3", "abc"] {
            assert!(matches!(to_fixed_point(bad, 10), Err(FixedPointError::NotANumeral(_))), "{bad}");
        }
        assert_eq!(to_fixed_point("1", 20), Err(FixedPointError::BadScale(20)));
        assert_eq!(to_fixed_point("1", 0), Err(FixedPointError::BadScale(0)));
    }
}
