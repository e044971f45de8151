//! Line-oriented `key field field ...` text format shared by the model
//! serializers. Floats are written with the shortest representation that
//! parses back to the same bits.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Default)]
pub(crate) struct TextWriter {
    out: String,
}

impl TextWriter {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn line<I, T>(&mut self, key: &str, fields: I)
    where
        I: IntoIterator<Item = T>,
        T: std::fmt::Display,
    {
        self.out.push_str(key);
        for f in fields {
            let _ = write!(self.out, " {f}");
        }
        self.out.push('\n');
    }

    pub(crate) fn floats(&mut self, key: &str, values: &[f64]) {
        self.out.push_str(key);
        for v in values {
            let _ = write!(self.out, " {v:?}");
        }
        self.out.push('\n');
    }

    pub(crate) fn finish(self) -> String {
        self.out
    }
}

pub(crate) struct TextReader<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> TextReader<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Self { lines, pos: 0 }
    }

    /// Consumes the next line, which must start with `key`, and returns the
    /// remaining whitespace-separated fields.
    pub(crate) fn fields(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let Some(&(lineno, line)) = self.lines.get(self.pos) else {
            return Err(Error::Format(format!(
                "expected `{key}`, found end of input"
            )));
        };
        let mut it = line.split_whitespace();
        let found = it.next().unwrap_or_default();
        if found != key {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected `{key}`, found `{found}`"),
            });
        }
        self.pos += 1;
        Ok((lineno, it.collect()))
    }

    pub(crate) fn parsed<T: FromStr>(&mut self, key: &str) -> Result<Vec<T>> {
        let (line, fields) = self.fields(key)?;
        fields
            .iter()
            .map(|f| {
                f.parse::<T>().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad value `{f}` for `{key}`"),
                })
            })
            .collect()
    }

    pub(crate) fn scalar<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let line = self.lines.get(self.pos).map(|l| l.0).unwrap_or(0);
        let mut v = self.parsed::<T>(key)?;
        if v.len() != 1 {
            return Err(Error::Parse {
                line,
                message: format!("`{key}` takes exactly one value"),
            });
        }
        Ok(v.pop().unwrap())
    }

    pub(crate) fn floats(&mut self, key: &str, expected: usize) -> Result<Vec<f64>> {
        let line = self.lines.get(self.pos).map(|l| l.0).unwrap_or(0);
        let v = self.parsed::<f64>(key)?;
        if v.len() != expected {
            return Err(Error::Parse {
                line,
                message: format!("`{key}` has {} values, expected {expected}", v.len()),
            });
        }
        Ok(v)
    }
}
