//! Design specification files.
//!
//! TOML key-value text. Angles may be plain radians or strings with a `pi`
//! suffix such as `"0.25pi"` or `"0.8594*pi"`.
//!
//! ```toml
//! transition_width = "0.25pi"
//! ripple_pass = 0.001
//! ripple_stop = 0.001
//! max_error = 0.001
//! b_low = "0.75pi"
//! b_high = "0.8594pi"
//! # optional: N, L, grid_K, facets_P
//! ```

use std::collections::BTreeMap;

use fcvbw::Spec;

#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub spec: Spec,
    pub fft_len: Option<usize>,
    pub filter_len: Option<usize>,
    pub grid_k: Option<usize>,
    pub facets: Option<usize>,
}

const KNOWN: [&str; 10] = [
    "transition_width",
    "ripple_pass",
    "ripple_stop",
    "max_error",
    "b_low",
    "b_high",
    "N",
    "L",
    "grid_K",
    "facets_P",
];

pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "");
    let Some(coef) = t.strip_suffix("pi") else {
        return t.parse::<f64>().map_err(|_| format!("cannot parse '{s}'"));
    };
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let c = if coef.is_empty() {
        1.0
    } else {
        coef.parse::<f64>().map_err(|_| format!("cannot parse '{s}'"))?
    };
    Ok(c * std::f64::consts::PI)
}

fn real(table: &BTreeMap<String, toml::Value>, key: &str) -> Result<Option<f64>, String> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Float(v)) => Ok(Some(*v)),
        Some(toml::Value::Integer(v)) => Ok(Some(*v as f64)),
        Some(toml::Value::String(s)) => parse_angle(s).map(Some).map_err(|e| format!("{key}: {e}")),
        Some(other) => Err(format!("{key}: expected a number, got {other}")),
    }
}

fn count(table: &BTreeMap<String, toml::Value>, key: &str) -> Result<Option<usize>, String> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Integer(v)) if *v > 0 => Ok(Some(*v as usize)),
        Some(other) => Err(format!("{key}: expected a positive integer, got {other}")),
    }
}

pub fn parse(text: &str) -> Result<SpecFile, String> {
    let table: BTreeMap<String, toml::Value> = toml::from_str(text).map_err(|e| e.to_string())?;
    if let Some(k) = table.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return Err(format!("unknown key '{k}'"));
    }
    let need = |key: &str| -> Result<f64, String> { real(&table, key)?.ok_or(format!("missing key '{key}'")) };
    let spec = Spec::new(
        need("transition_width")?,
        need("ripple_pass")?,
        need("ripple_stop")?,
        need("max_error")?,
        need("b_low")?,
        need("b_high")?,
    )
    .map_err(|e| e.to_string())?;
    Ok(SpecFile {
        spec,
        fft_len: count(&table, "N")?,
        filter_len: count(&table, "L")?,
        grid_k: count(&table, "grid_K")?,
        facets: count(&table, "facets_P")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.25pi").unwrap(), 0.25 * PI);
        assert_eq!(parse_angle("0.8594 * pi").unwrap(), 0.8594 * PI);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("1.5").unwrap(), 1.5);
        assert!(parse_angle("quarter").is_err());
    }

    #[test]
    fn full_file() {
        let f = parse(
            "transition_width = \"0.25pi\"\nripple_pass = 0.001\nripple_stop = 0.001\n\
             max_error = 0.001\nb_low = \"0.75pi\"\nb_high = \"0.8594pi\"\nL = 33\n",
        )
        .unwrap();
        assert_eq!(f.filter_len, Some(33));
        assert_eq!(f.fft_len, None);
        assert_eq!(f.spec.band_high, 0.8594 * PI);
        assert!(parse("ripple_pass = 0.1").is_err());
        assert!(parse("bogus = 1").is_err());
    }
}
