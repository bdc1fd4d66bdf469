//! CSV and JSON forms of series. Exact rationals round-trip losslessly.

use rug::Rational;

use super::{Bivariate, Series};
use crate::scalar::{parse_rational, Scalar};

/// `index,numerator,denominator` rows with a header line.
pub fn series_to_csv<S: Scalar>(s: &Series<S>) -> String {
    let mut out = String::from("index,numerator,denominator\n");
    for (k, c) in s.coeffs().iter().enumerate() {
        let (n, d) = c.render_parts();
        out.push_str(&format!("{k},{n},{d}\n"));
    }
    out
}

/// `n,p,numerator,denominator` rows, outer index first.
pub fn bivariate_to_csv<S: Scalar>(f: &Bivariate<S>) -> String {
    let mut out = String::from("n,p,numerator,denominator\n");
    for (n, slice) in f.slices().iter().enumerate() {
        for (p, c) in slice.coeffs().iter().enumerate() {
            let (num, den) = c.render_parts();
            out.push_str(&format!("{n},{p},{num},{den}\n"));
        }
    }
    out
}

/// JSON array of coefficient strings.
pub fn series_to_json<S: Scalar>(s: &Series<S>) -> serde_json::Value {
    serde_json::Value::Array(s.coeffs().iter().map(|c| serde_json::Value::String(c.render())).collect())
}

/// Parses the exact JSON form back; `None` on any malformed entry.
pub fn series_from_json(v: &serde_json::Value) -> Option<Series<Rational>> {
    let arr = v.as_array()?;
    if arr.is_empty() {
        return None;
    }
    let coeffs = arr.iter().map(|e| parse_rational(e.as_str()?)).collect::<Option<Vec<_>>>()?;
    Some(Series::from_coeffs(coeffs, ()))
}
