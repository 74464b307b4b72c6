//! Loader for the NNet text format used to distribute small control networks.
//!
//! Layout: optional `//` comment lines, then comma-separated header lines
//! (layer count and sizes, an unused flag, sensor minima and maxima, and the
//! normalization means and ranges with one trailing output entry each),
//! followed per layer by one line per weight row and one line per bias value.
//! Hidden layers are ReLU and the output layer is linear.

use std::path::Path;

use crate::error::{Error, Result};
use crate::network::{Activation, Layer, Network, Normalization};

/// Line-tracking reader over the non-comment lines of an NNet file.
struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    /// 1-based line number of the most recently returned line.
    pub current: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { iter: text.lines().enumerate(), current: 0 }
    }

    /// Next non-comment, non-blank line, or a truncation error.
    fn next(&mut self) -> Result<&'a str> {
        for (idx, line) in &mut self.iter {
            self.current = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with("//") {
                continue;
            }
            return Ok(trimmed);
        }
        Err(Error::Parse { line: Some(self.current), message: "unexpected end of file".into() })
    }

    /// Next line parsed as comma-separated floats; a trailing comma is allowed.
    fn numbers(&mut self) -> Result<Vec<f64>> {
        let line = self.next()?;
        let current = self.current;
        line.split(',')
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line: Some(current),
                    message: format!("expected a number, found {f:?}"),
                })
            })
            .collect()
    }

    fn expect_count(&mut self, expected: usize, what: &str) -> Result<Vec<f64>> {
        let values = self.numbers()?;
        if values.len() != expected {
            return Err(Error::Parse {
                line: Some(self.current),
                message: format!("{what}: expected {expected} values, found {}", values.len()),
            });
        }
        Ok(values)
    }
}

/// Parses NNet text into a [`Network`] with normalization attached.
pub fn parse_nnet(text: &str) -> Result<Network> {
    let mut lines = Lines::new(text);

    let header = lines.expect_count(4, "header")?;
    let num_layers = header[0] as usize;
    let input_size = header[1] as usize;
    let output_size = header[2] as usize;
    if num_layers == 0 || input_size == 0 || output_size == 0 {
        return Err(Error::Parse { line: Some(lines.current), message: "degenerate header sizes".into() });
    }

    let sizes: Vec<usize> = lines
        .expect_count(num_layers + 1, "layer sizes")?
        .iter()
        .map(|&v| v as usize)
        .collect();
    if sizes[0] != input_size || sizes[num_layers] != output_size {
        return Err(Error::Parse {
            line: Some(lines.current),
            message: "layer sizes disagree with header input/output sizes".into(),
        });
    }

    lines.next()?; // unused flag line

    let input_min = lines.expect_count(input_size, "input minima")?;
    let input_max = lines.expect_count(input_size, "input maxima")?;
    let means = lines.expect_count(input_size + 1, "normalization means")?;
    let ranges = lines.expect_count(input_size + 1, "normalization ranges")?;

    let mut layers = Vec::with_capacity(num_layers);
    for k in 0..num_layers {
        let (rows, cols) = (sizes[k + 1], sizes[k]);
        let mut weights = Vec::with_capacity(rows);
        for _ in 0..rows {
            weights.push(lines.expect_count(cols, "weight row")?);
        }
        let mut bias = Vec::with_capacity(rows);
        for _ in 0..rows {
            bias.push(lines.expect_count(1, "bias entry")?[0]);
        }
        let activation = if k + 1 == num_layers { Activation::Linear } else { Activation::Relu };
        layers.push(Layer::new(weights, bias, activation)?);
    }

    let normalization = Normalization {
        input_min,
        input_max,
        input_mean: means[..input_size].to_vec(),
        input_range: ranges[..input_size].to_vec(),
        output_mean: means[input_size],
        output_range: ranges[input_size],
    };
    Network::new(layers, Some(normalization))
}

/// Reads and parses an NNet file.
pub fn load_nnet(path: impl AsRef<Path>) -> Result<Network> {
    parse_nnet(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "\
// tiny 1-hidden-layer net
2,2,1,2,
2,2,1,
0,
0.0,0.0,
1.0,1.0,
0.5,0.5,0.0,
1.0,1.0,1.0,
1.0,0.0,
0.0,1.0,
0.1,
-0.1,
1.0,-1.0,
0.0,
";

    #[test]
    fn parses_tiny_net() {
        let net = parse_nnet(TINY).unwrap();
        assert_eq!(net.input_dim(), 2);
        assert_eq!(net.output_dim(), 1);
        assert_eq!(net.layers.len(), 2);
        assert_eq!(net.layers[0].activation, Activation::Relu);
        assert_eq!(net.layers[1].activation, Activation::Linear);
        assert_eq!(net.layers[0].bias, vec![0.1, -0.1]);
        let norm = net.normalization.as_ref().unwrap();
        assert_eq!(norm.output_mean, 0.0);
        assert_eq!(norm.output_range, 1.0);
    }

    #[test]
    fn truncated_file_reports_line() {
        // Drop the final bias line.
        let cut = TINY.trim_end().rsplitn(2, '\n').nth(1).unwrap();
        match parse_nnet(cut) {
            Err(Error::Parse { line: Some(l), .. }) => assert!(l >= 12, "line {l}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bias_row_with_extra_values_reports_line() {
        let bad = TINY.replace("\n0.1,\n", "\n0.1,0.2,\n");
        match parse_nnet(&bad) {
            Err(Error::Parse { line: Some(l), message }) => {
                assert!(message.contains("bias"), "message {message}");
                assert_eq!(l, 11);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_field_reports_line() {
        let bad = TINY.replace("0.1,", "abc,");
        assert!(matches!(parse_nnet(&bad), Err(Error::Parse { line: Some(_), .. })));
    }
}
