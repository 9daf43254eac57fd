//! Exact rational helpers shared by the front end and the solver boundary.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses a decimal literal (`12`, `-0.25`, `1e-3`, `6.000000067055225`) or a
/// fraction `p/q` into an exact rational.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let scale = exponent - frac_part.len() as i64;
    if scale.unsigned_abs() > 4000 {
        return None;
    }
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        r = -r;
    }
    Some(r)
}

/// Converts a JSON number without going through a lossy binary round trip:
/// the shortest decimal rendering of the number is parsed exactly.
pub fn from_json_number(n: &serde_json::Number) -> Option<Rational> {
    parse_decimal(&n.to_string())
}

/// Exact value of a finite double.
pub fn from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

/// Exact rational of the shortest decimal that round-trips `v`; used when a
/// double comes from user data rather than from arithmetic.
pub fn from_f64_decimal(v: f64) -> Option<Rational> {
    if !v.is_finite() {
        return None;
    }
    parse_decimal(&format!("{v:?}"))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Smallest double interval `[lo, hi]` containing `r`.
pub fn enclose(r: &Rational) -> (f64, f64) {
    let v = to_f64(r);
    if !v.is_finite() {
        return if v > 0.0 { (f64::MAX, f64::INFINITY) } else { (f64::NEG_INFINITY, f64::MIN) };
    }
    match Rational::from_float(v) {
        Some(exact) if &exact == r => (v, v),
        Some(exact) if &exact < r => {
            let mut hi = v.next_up();
            while Rational::from_float(hi).is_some_and(|h| &h < r) {
                hi = hi.next_up();
            }
            (v, hi)
        }
        _ => {
            let mut lo = v.next_down();
            while Rational::from_float(lo).is_some_and(|l| &l > r) {
                lo = lo.next_down();
            }
            (lo, v)
        }
    }
}

pub fn is_integer(r: &Rational) -> bool {
    r.is_integer()
}

/// Renders a rational as a terminating decimal when possible, else `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut d = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut twos, mut fives) = (0usize, 0usize);
    while d.is_even() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let scaled = r * Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    let n = scaled.to_integer();
    let neg = n.is_negative();
    let mut digits = n.abs().to_string();
    if digits.len() <= places {
        digits = format!("{}{}", "0".repeat(places + 1 - digits.len()), digits);
    }
    let split = digits.len() - places;
    format!("{}{}.{}", if neg { "-" } else { "" }, &digits[..split], &digits[split..])
}

/// JSON number for a report value (nearest double).
pub fn json_number(r: &Rational) -> serde_json::Value {
    serde_json::Number::from_f64(to_f64(r)).map(serde_json::Value::Number).unwrap_or(serde_json::Value::Null)
}

pub fn floor(r: &Rational) -> Rational {
    r.floor()
}

pub fn ceil(r: &Rational) -> Rational {
    r.ceil()
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

pub fn min(a: &Rational, b: &Rational) -> Rational {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}
