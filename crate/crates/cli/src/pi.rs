//! `--pi` argument: a file with one probability per line, or an inline list
//! `v1xk1,v2xk2,...` where `vxk` repeats `v` `k` times and a bare `v` counts
//! once.

use std::fs;
use std::path::Path;

use phenosim::sampling::CaseProbabilities;
use phenosim::{Error, Result};

pub fn resolve(arg: &str) -> Result<CaseProbabilities> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path)?;
        return CaseProbabilities::new(parse_lines(&text, arg)?);
    }
    CaseProbabilities::new(parse_inline(arg)?)
}

fn parse_error(path: &str, line: usize, column: usize, message: String) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        column,
        message,
    }
}

pub fn parse_inline(spec: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut column = 1;
    for item in spec.split(',') {
        let bad = |what: &str| parse_error("--pi", 1, column, format!("{what} in {item:?}"));
        let (value, count) = match item.trim().split_once('x') {
            Some((v, k)) => (v, k.trim().parse::<usize>().map_err(|_| bad("bad repeat count"))?),
            None => (item.trim(), 1),
        };
        let value: f64 = value.trim().parse().map_err(|_| bad("bad probability"))?;
        out.extend(std::iter::repeat_n(value, count));
        column += item.len() + 1;
    }
    Ok(out)
}

fn parse_lines(text: &str, path: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| parse_error(path, i + 1, 1, format!("bad probability {:?}", l.trim())))
        })
        .collect()
}
