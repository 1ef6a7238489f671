//! Recursive-descent parser for the norm expression grammar.
//!
//! ```text
//! expr    := name "(" args ")"        name in {lp, quad, sum, max, scale, polygon, dual}
//! lp      := "lp" "(" p [ "," "w" "=" list ] ")"      p: real >= 1 or "inf"
//! quad    := "quad" "(" matrix ")"                    matrix: [[a, b], ...] row-major
//! sum/max := name "(" expr { "," expr } ")"
//! scale   := "scale" "(" c "," expr ")"
//! polygon := "polygon" "(" [[x, y], ...] ")"
//! dual    := "dual" "(" expr ")"
//! ```
//!
//! Whitespace is insignificant everywhere. Syntax errors carry the byte
//! offset of the offending character; structural violations (p < 1, non-SPD
//! matrix, ...) surface as [`Error::InvalidNorm`] from the checked
//! constructors.

use super::NormExpr;
use crate::error::{Error, Result};

/// Parse a norm expression; the result round-trips through the canonical printer.
pub fn parse_norm(text: &str) -> Result<NormExpr> {
    let mut p = Parser { input: text.as_bytes(), pos: 0 };
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos != p.input.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.input.get(self.pos).copied()
    }

    fn expect(&mut self, ch: u8) -> Result<()> {
        self.skip_ws();
        if self.input.get(self.pos) == Some(&ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", ch as char)))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a name"));
        }
        Ok(std::str::from_utf8(&self.input[start..self.pos]).unwrap().to_string())
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.input;
        let mut i = self.pos;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                i = j;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
        }
        let text = std::str::from_utf8(&bytes[start..i]).unwrap();
        let value: f64 = text.parse().map_err(|_| self.err("expected a number"))?;
        if !value.is_finite() {
            return Err(self.err("number out of range"));
        }
        self.pos = i;
        Ok(value)
    }

    /// `[r, r, ...]`
    fn number_list(&mut self) -> Result<Vec<f64>> {
        self.expect(b'[')?;
        let mut items = Vec::new();
        if self.peek() == Some(b']') {
            self.pos += 1;
            return Ok(items);
        }
        loop {
            items.push(self.number()?);
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    return Ok(items);
                }
                _ => return Err(self.err("expected ',' or ']'")),
            }
        }
    }

    /// `[[...], [...], ...]`
    fn nested_lists(&mut self) -> Result<Vec<Vec<f64>>> {
        self.expect(b'[')?;
        let mut rows = Vec::new();
        if self.peek() == Some(b']') {
            self.pos += 1;
            return Ok(rows);
        }
        loop {
            rows.push(self.number_list()?);
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    return Ok(rows);
                }
                _ => return Err(self.err("expected ',' or ']'")),
            }
        }
    }

    fn expr(&mut self) -> Result<NormExpr> {
        self.skip_ws();
        let name_pos = self.pos;
        let name = self.ident()?;
        self.expect(b'(')?;
        let expr = match name.as_str() {
            "lp" => {
                let p = if self.peek() == Some(b'i') {
                    let ident = self.ident()?;
                    if ident != "inf" {
                        return Err(self.err(format!("expected 'inf', got '{ident}'")));
                    }
                    f64::INFINITY
                } else {
                    self.number()?
                };
                let weights = if self.peek() == Some(b',') {
                    self.pos += 1;
                    let key_pos = self.pos;
                    let key = self.ident()?;
                    if key != "w" {
                        return Err(Error::Syntax {
                            pos: key_pos,
                            msg: format!("expected 'w=[...]', got '{key}'"),
                        });
                    }
                    self.expect(b'=')?;
                    Some(self.number_list()?)
                } else {
                    None
                };
                NormExpr::lp(p, weights)?
            }
            "quad" => NormExpr::quad(self.nested_lists()?)?,
            "sum" | "max" => {
                let mut children = vec![self.expr()?];
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    children.push(self.expr()?);
                }
                if name == "sum" {
                    NormExpr::sum(children)?
                } else {
                    NormExpr::max(children)?
                }
            }
            "scale" => {
                let factor = self.number()?;
                self.expect(b',')?;
                let child = self.expr()?;
                NormExpr::scale(factor, child)?
            }
            "polygon" => {
                let rows = self.nested_lists()?;
                let mut vertices = Vec::with_capacity(rows.len());
                for row in rows {
                    if row.len() != 2 {
                        return Err(self.err("polygon vertices must be pairs [x, y]"));
                    }
                    vertices.push([row[0], row[1]]);
                }
                NormExpr::polygon(vertices)?
            }
            "dual" => NormExpr::dual(self.expr()?)?,
            other => {
                return Err(Error::Syntax {
                    pos: name_pos,
                    msg: format!("unknown norm '{other}'"),
                })
            }
        };
        self.expect(b')')?;
        Ok(expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::{evaluate, Vector};

    fn v(coords: &[f64]) -> Vector {
        Vector::new(coords.to_vec()).unwrap()
    }

    #[test]
    fn parses_weighted_l1() {
        let n = parse_norm("lp(1, w=[2,1])").unwrap();
        assert_eq!(evaluate(&n, &v(&[1.0, 1.0])).unwrap(), 3.0);
        assert_eq!(n.to_string(), "lp(1, w=[2, 1])");
    }

    #[test]
    fn parses_quad_and_sum() {
        let n = parse_norm("sum(quad([[3,0],[0,1]]), quad([[1,0],[0,3]]))").unwrap();
        // ||(1,1)||_3 = 2 + 2 = 4
        assert_eq!(evaluate(&n, &v(&[1.0, 1.0])).unwrap(), 4.0);
    }

    #[test]
    fn whitespace_is_insignificant() {
        let a = parse_norm("max( quad ( [ [3, 0], [0, 1] ] ) ,quad([[1,0],[0,3]]) )").unwrap();
        let b = parse_norm("max(quad([[3,0],[0,1]]),quad([[1,0],[0,3]]))").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inf_is_a_token() {
        let n = parse_norm("lp(inf)").unwrap();
        assert_eq!(n.to_string(), "lp(inf)");
        assert_eq!(evaluate(&n, &v(&[0.5, -2.0])).unwrap(), 2.0);
        assert!(parse_norm("lp(infinity)").is_err());
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_norm("lp(2") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse_norm("blah(2)") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 0),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn semantic_errors_are_invalid_norm() {
        assert!(matches!(parse_norm("lp(0.5)"), Err(Error::InvalidNorm(_))));
        assert!(matches!(parse_norm("quad([[1,2],[2,1]])"), Err(Error::InvalidNorm(_))));
        assert!(matches!(
            parse_norm("polygon([[1,0],[0,1],[-1,0],[0.5,-0.5]])"),
            Err(Error::InvalidNorm(_))
        ));
        assert!(matches!(parse_norm("dual(sum(lp(1),lp(2)))"), Err(Error::NotDualizable(_))));
    }

    #[test]
    fn print_parse_roundtrip() {
        let sources = [
            "lp(1, w=[2, 1])",
            "lp(inf)",
            "lp(2.5, w=[0.1, 3, 7])",
            "quad([[3, 0], [0, 1]])",
            "sum(quad([[3, 0], [0, 1]]), quad([[1, 0], [0, 3]]))",
            "max(lp(1), lp(inf))",
            "scale(2, lp(1))",
            "polygon([[1, 0], [0, 1], [-1, 0], [0, -1]])",
            "dual(lp(1, w=[2, 1]))",
        ];
        for src in sources {
            let n = parse_norm(src).unwrap();
            let printed = n.to_string();
            let reparsed = parse_norm(&printed).unwrap();
            assert_eq!(n, reparsed, "roundtrip failed for {src}");
        }
    }
}
