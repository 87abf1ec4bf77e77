//! Parser for the `eval` argument `a1,a2;b1,b2;x`.

use std::fmt;

use hypid::Cx;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// Zero-based character offset into the input.
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at position {}: {}", self.pos, self.msg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesArgs {
    pub top: Vec<Cx>,
    pub bottom: Vec<Cx>,
    pub x: Cx,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        pos,
        msg: msg.into(),
    })
}

fn real(s: &str, pos: usize) -> Result<f64, ParseError> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => s
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map_or_else(|| err(pos, format!("invalid number `{s}`")), Ok),
    }
}

/// `1.5`, `-2e-3`, `0.5+0.25i`, `-i`, `3i`.
pub fn complex(raw: &str, pos: usize) -> Result<Cx, ParseError> {
    let lead = raw.len() - raw.trim_start().len();
    let s = raw.trim();
    let pos = pos + lead;
    if s.is_empty() {
        return err(pos, "empty number");
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return Ok(Cx::new(real(s, pos)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Cx::new(real(&body[..k], pos)?, real(&body[k..], pos + k)?)),
        None => Ok(Cx::new(0.0, real(body, pos)?)),
    }
}

fn list(s: &str, pos: usize) -> Result<Vec<Cx>, ParseError> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    let mut at = pos;
    for item in s.split(',') {
        out.push(complex(item, at)?);
        at += item.len() + 1;
    }
    Ok(out)
}

pub fn series_args(input: &str) -> Result<SeriesArgs, ParseError> {
    let parts: Vec<&str> = input.split(';').collect();
    if parts.len() != 3 {
        let pos = input
            .char_indices()
            .filter(|&(_, c)| c == ';')
            .nth(2)
            .map_or(input.len(), |(i, _)| i);
        return err(
            pos,
            format!(
                "expected `top;bottom;x` with two `;`, found {}",
                parts.len() - 1
            ),
        );
    }
    let top = list(parts[0], 0)?;
    let bottom = list(parts[1], parts[0].len() + 1)?;
    let x = complex(parts[2], parts[0].len() + parts[1].len() + 2)?;
    Ok(SeriesArgs { top, bottom, x })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(complex("1.5", 0).unwrap(), Cx::new(1.5, 0.0));
        assert_eq!(complex(" -2e-3 ", 0).unwrap(), Cx::new(-2e-3, 0.0));
        assert_eq!(complex("0.5+0.25i", 0).unwrap(), Cx::new(0.5, 0.25));
        assert_eq!(complex("1e-2-3e+1i", 0).unwrap(), Cx::new(1e-2, -30.0));
        assert_eq!(complex("-i", 0).unwrap(), Cx::new(0.0, -1.0));
        assert_eq!(complex("3i", 0).unwrap(), Cx::new(0.0, 3.0));
        assert_eq!(complex("2-i", 0).unwrap(), Cx::new(2.0, -1.0));
    }

    #[test]
    fn full_argument() {
        let a = series_args("1,0.5+0.1i;2;0.3").unwrap();
        assert_eq!(a.top.len(), 2);
        assert_eq!(a.bottom, vec![Cx::new(2.0, 0.0)]);
        assert_eq!(a.x, Cx::new(0.3, 0.0));
        let empty = series_args(";;-0.5").unwrap();
        assert!(empty.top.is_empty() && empty.bottom.is_empty());
    }

    #[test]
    fn error_positions() {
        assert_eq!(series_args("1,zz;2;0.3").unwrap_err().pos, 2);
        assert_eq!(series_args("1;2,,3;0.3").unwrap_err().pos, 4);
        assert_eq!(series_args("1;2;0.3x").unwrap_err().pos, 4);
        assert_eq!(series_args("1;2").unwrap_err().pos, 3);
        assert_eq!(series_args("1;2;3;4").unwrap_err().pos, 5);
    }
}
