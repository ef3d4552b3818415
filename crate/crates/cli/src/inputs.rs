//! Systems, observables and signals described on the command line.

use std::path::Path;

use eo_core::dynsys::{load_csv, FiniteSystem, Observable};
use eo_core::signal::Signal;
use eo_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{usage, CliError, CliResult};

/// Deterministic generator for one named purpose under a run seed.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_values<R: Rng>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| random_complex(rng)).collect()
}

fn parse_size(s: &str, what: &str) -> CliResult<usize> {
    s.parse()
        .map_err(|_| CliError::Usage(format!("bad {what} {s:?}")))
}

/// `cyclic:<m>`, `identity:<m>`, `random:<m>[:<seed>]` or `csv:<path>`.
/// A CSV system also carries its observable.
pub fn parse_system(spec: &str, seed: u64) -> CliResult<(FiniteSystem, Option<Observable>)> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("system must look like kind:arg, got {spec:?}")))?;
    let sys = match kind {
        "cyclic" => FiniteSystem::cyclic(parse_size(rest, "system size")?)?,
        "identity" => FiniteSystem::identity(parse_size(rest, "system size")?)?,
        "random" => {
            let (m, s) = match rest.split_once(':') {
                Some((m, s)) => (m, s.parse().map_err(|_| CliError::Usage(format!("bad seed {s:?}")))?),
                None => (rest, seed),
            };
            FiniteSystem::random(parse_size(m, "system size")?, s)?
        }
        "csv" => {
            let text = std::fs::read_to_string(Path::new(rest))
                .map_err(|e| CliError::Usage(format!("cannot read {rest}: {e}")))?;
            let (sys, f) = load_csv(&text)?;
            return Ok((sys, Some(f)));
        }
        other => return usage(format!("unknown system kind {other:?}")),
    };
    if sys.size() == 0 {
        return usage("system must have at least one point");
    }
    Ok((sys, None))
}

fn parse_list(s: &str) -> CliResult<Vec<Complex64>> {
    s.split(',')
        .map(|v| {
            let v = v.trim();
            v.parse::<f64>()
                .map(|re| Complex64::new(re, 0.0))
                .map_err(|_| CliError::Usage(format!("bad value {v:?}")))
        })
        .collect()
}

/// `random`, `const:<c>` or `list:<v0>,<v1>,...` on `m` points.
pub fn parse_observable(spec: &str, m: usize, rng: &mut ChaCha8Rng) -> CliResult<Observable> {
    if spec == "random" {
        return Ok(Observable::new(random_values(rng, m)));
    }
    if let Some(c) = spec.strip_prefix("const:") {
        let c: f64 = c.parse().map_err(|_| CliError::Usage(format!("bad constant {c:?}")))?;
        return Ok(Observable::constant(m, Complex64::new(c, 0.0)));
    }
    if let Some(list) = spec.strip_prefix("list:") {
        let v = parse_list(list)?;
        if v.len() != m {
            return usage(format!("observable has {} values for {m} points", v.len()));
        }
        return Ok(Observable::new(v));
    }
    usage(format!("observable must be random, const:<c> or list:<values>, got {spec:?}"))
}

/// `random:<len>` (support starting at 0), `delta:<k>` or
/// `list:<v0>,<v1>,...` starting at 0.
pub fn parse_signal(spec: &str, rng: &mut ChaCha8Rng) -> CliResult<Signal> {
    if let Some(len) = spec.strip_prefix("random:") {
        return Ok(Signal::new(0, random_values(rng, parse_size(len, "signal length")?)));
    }
    if let Some(k) = spec.strip_prefix("delta:") {
        let k: i64 = k.parse().map_err(|_| CliError::Usage(format!("bad position {k:?}")))?;
        return Ok(Signal::delta(k));
    }
    if let Some(list) = spec.strip_prefix("list:") {
        return Ok(Signal::new(0, parse_list(list)?));
    }
    usage(format!("signal must be random:<len>, delta:<k> or list:<values>, got {spec:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn systems() {
        assert_eq!(parse_system("cyclic:6", 1).unwrap().0.apply(5), 0);
        let a = parse_system("random:9", 3).unwrap().0;
        let b = parse_system("random:9:3", 99).unwrap().0;
        assert_eq!(a, b);
        assert!(parse_system("cyclic:0", 1).is_err());
        assert!(parse_system("torus:3", 1).is_err());
        assert!(parse_system("cyclic", 1).is_err());
    }

    #[test]
    fn observables_and_signals() {
        let mut rng = rng_for(1, 0);
        assert_eq!(parse_observable("const:2", 3, &mut rng).unwrap().at(2), Complex64::new(2.0, 0.0));
        assert!(parse_observable("list:1,2", 3, &mut rng).is_err());
        assert_eq!(parse_observable("random", 4, &mut rng).unwrap().len(), 4);
        assert_eq!(parse_signal("random:5", &mut rng).unwrap().len(), 5);
        assert_eq!(parse_signal("delta:-2", &mut rng).unwrap().offset(), -2);
        assert!(parse_signal("noise", &mut rng).is_err());
    }

    #[test]
    fn streams_are_independent_and_reproducible() {
        let a: u64 = rng_for(42, 1).gen();
        let b: u64 = rng_for(42, 1).gen();
        let c: u64 = rng_for(42, 2).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
