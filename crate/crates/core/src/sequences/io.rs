use std::io::BufRead;

use super::SequenceError;

/// Parses one positive integer per line. Blank lines and `#` comments are
/// skipped.
pub fn parse_value_list(text: &str) -> Result<Vec<u64>, SequenceError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        push_line(&mut out, i + 1, line)?;
    }
    Ok(out)
}

pub fn read_value_list<R: BufRead>(reader: R) -> Result<Vec<u64>, SequenceError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| SequenceError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        push_line(&mut out, i + 1, &line)?;
    }
    Ok(out)
}

fn push_line(out: &mut Vec<u64>, line_no: usize, line: &str) -> Result<(), SequenceError> {
    let body = line.split('#').next().unwrap_or("").trim();
    if body.is_empty() {
        return Ok(());
    }
    let v: u64 = body.parse().map_err(|_| SequenceError::Parse {
        line: line_no,
        message: format!("expected a positive integer, found {body:?}"),
    })?;
    if v == 0 {
        return Err(SequenceError::Parse {
            line: line_no,
            message: "values must be > 0".to_string(),
        });
    }
    out.push(v);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments() {
        let v = parse_value_list("# header\n1\n 2 \n\n3 # trailing\n").unwrap();
        assert_eq!(v, vec![1, 2, 3]);
        let e = parse_value_list("1\nx\n").unwrap_err();
        assert_eq!(
            e,
            SequenceError::Parse {
                line: 2,
                message: "expected a positive integer, found \"x\"".into()
            }
        );
        assert!(parse_value_list("0\n").is_err());
        assert_eq!(read_value_list("5\n6".as_bytes()).unwrap(), vec![5, 6]);
    }
}
