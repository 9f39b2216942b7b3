//! Parsing of the small value languages accepted on the command line.

use anyhow::{bail, Context, Result};

/// `log:a:b:n`, `lin:a:b:n`, a single number or a comma-separated list.
/// With `two_sided` the negated values are prepended in mirrored order.
pub fn parse_eps(spec: &str, two_sided: bool) -> Result<Vec<f64>> {
    let mut values = match spec.split(':').collect::<Vec<_>>().as_slice() {
        [kind @ ("log" | "lin"), a, b, n] => {
            let a: f64 = a.parse().with_context(|| format!("bad start {a:?} in {spec:?}"))?;
            let b: f64 = b.parse().with_context(|| format!("bad end {b:?} in {spec:?}"))?;
            let n: usize = n.parse().with_context(|| format!("bad count {n:?} in {spec:?}"))?;
            if n == 0 {
                bail!("grid {spec:?} has no points");
            }
            if *kind == "log" && (a <= 0.0 || b <= 0.0) {
                bail!("log grid {spec:?} needs positive end points");
            }
            (0..n)
                .map(|i| {
                    let s = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                    if *kind == "log" {
                        (a.ln() + (b.ln() - a.ln()) * s).exp()
                    } else {
                        a + (b - a) * s
                    }
                })
                .collect::<Vec<f64>>()
        }
        [_] => spec
            .split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad value {v:?} in {spec:?}")))
            .collect::<Result<_>>()?,
        _ => bail!("eps grid {spec:?} is neither log:a:b:n, lin:a:b:n nor a list"),
    };
    if values.iter().any(|v| !v.is_finite()) {
        bail!("eps grid {spec:?} contains non-finite values");
    }
    if two_sided {
        let mut mirrored: Vec<f64> = values.iter().rev().map(|v| -v).collect();
        mirrored.append(&mut values);
        values = mirrored;
    }
    Ok(values)
}

/// `lo:hi`.
pub fn parse_bracket(spec: &str) -> Result<(f64, f64)> {
    let (lo, hi) = spec
        .split_once(':')
        .with_context(|| format!("bracket {spec:?} is not of the form lo:hi"))?;
    let lo: f64 = lo.parse().with_context(|| format!("bad bracket start {lo:?}"))?;
    let hi: f64 = hi.parse().with_context(|| format!("bad bracket end {hi:?}"))?;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        bail!("bracket {spec:?} is empty");
    }
    Ok((lo, hi))
}
