use cheshire_core::{catalog, Amplitude, Ket};

use crate::report::{input_error, Outcome};

/// Deviation of the input norm from 1 above which a warning is printed.
pub const NORM_WARNING: f64 = 1e-9;

const PREFIX: &str = "vec:";

/// A catalog state name or `vec:` followed by eight comma-separated reals.
pub fn parse_state(spec: &str) -> Outcome<Ket> {
    let Some(body) = spec.strip_prefix(PREFIX) else {
        return Ok(catalog::state(spec)?);
    };
    let values = body
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| input_error(format!("`{t}` in `{spec}` is not a number")))
        })
        .collect::<Outcome<Vec<f64>>>()?;
    if values.len() != 8 {
        return Err(input_error(format!(
            "`{spec}` has {} numbers; expected 8 (re,im for H1,H2,V1,V2)",
            values.len()
        )));
    }
    let amps: [Amplitude; 4] =
        std::array::from_fn(|k| Amplitude::new(values[2 * k], values[2 * k + 1]));
    let ket = Ket::new(amps)?;
    let norm = ket.norm();
    if (norm - 1.0).abs() > NORM_WARNING {
        eprintln!("warning: `{spec}` has norm {norm}; normalising");
    }
    Ok(ket.normalized()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cheshire_core::TOLERANCE;

    #[test]
    fn catalog_and_inline_agree() {
        let named = parse_state("E_CC").unwrap();
        let inline = parse_state("vec:0.5,0,0.5,0,0.5,0,-0.5,0").unwrap();
        assert!(named.approx_eq(&inline, TOLERANCE));
    }

    #[test]
    fn inline_is_normalised() {
        let k = parse_state("vec:2,0,0,0,0,0,0,0").unwrap();
        assert!((k.norm() - 1.0).abs() < TOLERANCE);
    }

    #[test]
    fn malformed_inline_rejected() {
        for bad in ["vec:1,0", "vec:a,0,0,0,0,0,0,0", "vec:0,0,0,0,0,0,0,0", "vec:nan,0,0,0,0,0,0,0", "Q7"] {
            assert!(parse_state(bad).is_err(), "{bad}");
        }
    }
}
