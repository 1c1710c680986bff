//! OpenQASM 2 subset: `qreg`, rx/ry/rz/rzz statements, `//` comments.
//!
//! `OPENQASM 2.0;` and `include "...";` headers are accepted and ignored.
//! Angles are float literals (optionally signed, with exponent). Errors carry
//! 1-based line/column positions.

use crate::circuit::{Circuit, GateKind, QubitId};
use crate::error::QasmError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Number(s) => format!("number '{s}'"),
            Tok::Str => "string literal".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Semi => "';'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    rest: std::str::Chars<'a>,
    peeked: Option<char>,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { rest: src.chars(), peeked: None, line: 1, col: 1 }
    }

    fn peek(&mut self) -> Option<char> {
        if self.peeked.is_none() {
            self.peeked = self.rest.next();
        }
        self.peeked
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.peeked = None;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) -> Result<(), QasmError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') => {
                    let (line, col) = (self.line, self.col);
                    self.bump();
                    if self.peek() != Some('/') {
                        return Err(QasmError::new(line, col, "unexpected character '/'"));
                    }
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    /// Next token plus its start position.
    fn next_token(&mut self) -> Result<(Tok, u32, u32), QasmError> {
        self.skip_trivia()?;
        let (line, col) = (self.line, self.col);
        let c = match self.peek() {
            None => return Ok((Tok::Eof, line, col)),
            Some(c) => c,
        };
        let tok = match c {
            '(' => {
                self.bump();
                Tok::LParen
            }
            ')' => {
                self.bump();
                Tok::RParen
            }
            '[' => {
                self.bump();
                Tok::LBracket
            }
            ']' => {
                self.bump();
                Tok::RBracket
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            ';' => {
                self.bump();
                Tok::Semi
            }
            '"' => {
                self.bump();
                loop {
                    match self.bump() {
                        Some('"') => break,
                        Some(_) => {}
                        None => return Err(QasmError::new(line, col, "unterminated string")),
                    }
                }
                Tok::Str
            }
            '+' | '-' | '.' | '0'..='9' => {
                let mut s = String::new();
                if matches!(c, '+' | '-') {
                    s.push(self.bump().unwrap());
                }
                while matches!(self.peek(), Some('0'..='9' | '.')) {
                    s.push(self.bump().unwrap());
                }
                if matches!(self.peek(), Some('e' | 'E')) {
                    s.push(self.bump().unwrap());
                    if matches!(self.peek(), Some('+' | '-')) {
                        s.push(self.bump().unwrap());
                    }
                    while matches!(self.peek(), Some('0'..='9')) {
                        s.push(self.bump().unwrap());
                    }
                }
                Tok::Number(s)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    s.push(self.bump().unwrap());
                }
                Tok::Ident(s)
            }
            c => return Err(QasmError::new(line, col, format!("unexpected character '{c}'"))),
        };
        Ok((tok, line, col))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    line: u32,
    col: u32,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, QasmError> {
        let mut lexer = Lexer::new(src);
        let (tok, line, col) = lexer.next_token()?;
        Ok(Parser { lexer, tok, line, col })
    }

    fn advance(&mut self) -> Result<Tok, QasmError> {
        let (tok, line, col) = self.lexer.next_token()?;
        self.line = line;
        self.col = col;
        Ok(std::mem::replace(&mut self.tok, tok))
    }

    fn err(&self, msg: impl Into<String>) -> QasmError {
        QasmError::new(self.line, self.col, msg)
    }

    fn expect(&mut self, want: Tok) -> Result<(), QasmError> {
        if self.tok == want {
            self.advance()?;
            Ok(())
        } else {
            Err(self.err(format!("expected {}, found {}", want.describe(), self.tok.describe())))
        }
    }

    fn expect_ident(&mut self) -> Result<String, QasmError> {
        match self.tok.clone() {
            Tok::Ident(s) => {
                self.advance()?;
                Ok(s)
            }
            other => Err(self.err(format!("expected identifier, found {}", other.describe()))),
        }
    }

    fn expect_uint(&mut self) -> Result<u32, QasmError> {
        match self.tok.clone() {
            Tok::Number(s) => {
                let v = s
                    .parse::<u32>()
                    .map_err(|_| self.err(format!("expected an unsigned integer, found '{s}'")))?;
                self.advance()?;
                Ok(v)
            }
            other => Err(self.err(format!("expected an integer, found {}", other.describe()))),
        }
    }

    fn expect_float(&mut self) -> Result<f64, QasmError> {
        match self.tok.clone() {
            Tok::Number(s) => {
                let v = s
                    .parse::<f64>()
                    .map_err(|_| self.err(format!("malformed number '{s}'")))?;
                self.advance()?;
                Ok(v)
            }
            other => Err(self.err(format!("expected a number, found {}", other.describe()))),
        }
    }

    /// `<reg>[<index>]`, checked against the declared register.
    fn operand(&mut self, reg: &Option<(String, u32)>) -> Result<QubitId, QasmError> {
        let (line, col) = (self.line, self.col);
        let name = self.expect_ident()?;
        let (reg_name, reg_size) = reg
            .as_ref()
            .ok_or_else(|| QasmError::new(line, col, "gate statement before qreg declaration"))?;
        if &name != reg_name {
            return Err(QasmError::new(line, col, format!("unknown register '{name}'")));
        }
        self.expect(Tok::LBracket)?;
        let (iline, icol) = (self.line, self.col);
        let idx = self.expect_uint()?;
        if idx >= *reg_size {
            return Err(QasmError::new(
                iline,
                icol,
                format!("qubit index {idx} out of range for register of size {reg_size}"),
            ));
        }
        self.expect(Tok::RBracket)?;
        Ok(QubitId(idx))
    }
}

pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let mut p = Parser::new(text)?;
    let mut reg: Option<(String, u32)> = None;
    let mut gates: Vec<(GateKind, QubitId, Option<QubitId>, f64)> = Vec::new();

    loop {
        let (line, col) = (p.line, p.col);
        let name = match p.tok.clone() {
            Tok::Eof => break,
            Tok::Ident(s) => {
                p.advance()?;
                s
            }
            other => return Err(p.err(format!("expected a statement, found {}", other.describe()))),
        };
        match name.as_str() {
            "OPENQASM" => {
                p.expect_float()?;
                p.expect(Tok::Semi)?;
            }
            "include" => {
                if p.tok != Tok::Str {
                    return Err(p.err(format!("expected string literal, found {}", p.tok.describe())));
                }
                p.advance()?;
                p.expect(Tok::Semi)?;
            }
            "qreg" => {
                if reg.is_some() {
                    return Err(QasmError::new(line, col, "duplicate qreg declaration"));
                }
                let reg_name = p.expect_ident()?;
                p.expect(Tok::LBracket)?;
                let size = p.expect_uint()?;
                p.expect(Tok::RBracket)?;
                p.expect(Tok::Semi)?;
                reg = Some((reg_name, size));
            }
            "rx" | "ry" | "rz" | "rzz" => {
                let kind = match name.as_str() {
                    "rx" => GateKind::Rx,
                    "ry" => GateKind::Ry,
                    "rz" => GateKind::Rz,
                    _ => GateKind::Rzz,
                };
                p.expect(Tok::LParen)?;
                let angle = p.expect_float()?;
                p.expect(Tok::RParen)?;
                let a = p.operand(&reg)?;
                let b = if kind == GateKind::Rzz {
                    let (cline, ccol) = (p.line, p.col);
                    p.expect(Tok::Comma)?;
                    let b = p.operand(&reg)?;
                    if b == a {
                        return Err(QasmError::new(
                            cline,
                            ccol,
                            format!("rzz needs two distinct qubits, got {a} twice"),
                        ));
                    }
                    Some(b)
                } else {
                    None
                };
                p.expect(Tok::Semi)?;
                gates.push((kind, a, b, angle));
            }
            other => {
                return Err(QasmError::new(line, col, format!("unknown gate name '{other}'")));
            }
        }
    }

    let num_qubits = reg.map_or(0, |(_, size)| size);
    let mut circuit = Circuit::new(num_qubits);
    for (kind, a, b, angle) in gates {
        match b {
            Some(b) => circuit.push_two(a, b, angle).unwrap(),
            None => circuit.push_single(kind, a, angle).unwrap(),
        };
    }
    Ok(circuit)
}

pub fn serialize_qasm(circuit: &Circuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\n");
    out.push_str(&format!("qreg q[{}];\n", circuit.num_qubits));
    for g in circuit.gates() {
        match g.kind.arity() {
            1 => out.push_str(&format!("{}({}) q[{}];\n", g.kind.name(), g.angle, g.qubits[0].0)),
            _ => out.push_str(&format!(
                "{}({}) q[{}],q[{}];\n",
                g.kind.name(),
                g.angle,
                g.qubits[0].0,
                g.qubits[1].0
            )),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_the_basic_subset() {
        let c = parse_qasm("qreg q[2]; rz(0.5) q[0]; rzz(1.0) q[0],q[1];").unwrap();
        assert_eq!(c.num_qubits, 2);
        assert_eq!(c.gate_count(), 2);
        assert_eq!(c.gate(crate::circuit::GateId(0)).kind, GateKind::Rz);
        assert_eq!(c.gate(crate::circuit::GateId(1)).kind, GateKind::Rzz);
        assert_eq!(c.gate(crate::circuit::GateId(1)).qubits, vec![QubitId(0), QubitId(1)]);
        assert_eq!(c.gate(crate::circuit::GateId(1)).duration, 3);
    }

    #[test]
    fn headers_comments_and_whitespace_are_ignored() {
        let src = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n// prelude\nqreg reg[3];\n  rx ( -1.5e0 )  reg [ 2 ] ; // tail\n";
        let c = parse_qasm(src).unwrap();
        assert_eq!(c.num_qubits, 3);
        assert_eq!(c.gate_count(), 1);
        assert_eq!(c.gate(crate::circuit::GateId(0)).angle, -1.5);
        assert_eq!(c.gate(crate::circuit::GateId(0)).qubits, vec![QubitId(2)]);
    }

    #[test]
    fn empty_body_gives_empty_circuit() {
        let c = parse_qasm("qreg q[4];").unwrap();
        assert_eq!(c.num_qubits, 4);
        assert_eq!(c.gate_count(), 0);
        assert_eq!(parse_qasm("").unwrap().gate_count(), 0);
    }

    #[test]
    fn repeated_qubit_in_rzz_is_rejected() {
        let err = parse_qasm("qreg q[2]; rzz(1.0) q[0],q[0];").unwrap_err();
        assert!(err.msg.contains("distinct"), "{err}");
    }

    #[test]
    fn errors_carry_line_and_column() {
        let err = parse_qasm("qreg q[1];\nrz(0.5) q[3];").unwrap_err();
        assert_eq!((err.line, err.col), (2, 11));
        assert!(err.msg.contains("out of range"), "{err}");

        let err = parse_qasm("qreg q[1]; cx q[0];").unwrap_err();
        assert_eq!((err.line, err.col), (1, 12));
        assert!(err.msg.contains("unknown gate name 'cx'"), "{err}");

        let err = parse_qasm("qreg q[1]; rz 0.5 q[0];").unwrap_err();
        assert_eq!((err.line, err.col), (1, 15));
    }

    #[test]
    fn gate_before_qreg_is_rejected() {
        let err = parse_qasm("rz(0.5) q[0];").unwrap_err();
        assert!(err.msg.contains("before qreg"), "{err}");
    }

    #[test]
    fn unknown_register_is_rejected() {
        let err = parse_qasm("qreg q[2]; rx(1.0) r[0];").unwrap_err();
        assert!(err.msg.contains("unknown register 'r'"), "{err}");
    }

    fn arb_circuit() -> impl Strategy<Value = Circuit> {
        (1u32..8, proptest::collection::vec((0u8..4, 0u32..8, 0u32..8, -10.0f64..10.0), 0..30))
            .prop_map(|(n, ops)| {
                let mut c = Circuit::new(n);
                for (kind, a, b, angle) in ops {
                    let a = QubitId(a % n);
                    let b = QubitId(b % n);
                    match kind {
                        0 => drop(c.push_single(GateKind::Rx, a, angle)),
                        1 => drop(c.push_single(GateKind::Ry, a, angle)),
                        2 => drop(c.push_single(GateKind::Rz, a, angle)),
                        _ if a != b => drop(c.push_two(a, b, angle)),
                        _ => {}
                    }
                }
                c
            })
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(c in arb_circuit()) {
            let text = serialize_qasm(&c);
            let back = parse_qasm(&text).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
