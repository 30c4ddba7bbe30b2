//! OpenQASM 2.0 subset: one quantum register, at most one classical register,
//! the Clifford gates of [`GateKind`] and `measure`.

use std::fmt::Write;

use thiserror::Error;

use super::{Circuit, Gate, GateKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QasmError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unsupported gate `{name}`")]
    UnsupportedGate { line: usize, col: usize, name: String },
    #[error("{line}:{col}: index {index} out of bounds for register `{reg}` of size {size}")]
    OutOfBounds { line: usize, col: usize, reg: String, index: usize, size: usize },
    #[error("{line}:{col}: only one quantum register is supported")]
    MultipleQuantumRegisters { line: usize, col: usize },
    #[error("{line}:{col}: only one classical register is supported")]
    MultipleClassicalRegisters { line: usize, col: usize },
    #[error("{line}:{col}: unknown register `{name}`")]
    UnknownRegister { line: usize, col: usize, name: String },
    #[error("{line}:{col}: repeated operand in `{name}`")]
    RepeatedOperand { line: usize, col: usize, name: String },
    #[error("no quantum register declared")]
    NoQuantumRegister,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Real(String),
    Str(String),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> QasmError {
    QasmError::Syntax { line, col, msg: msg.into() }
}

fn lex(text: &str) -> Result<Vec<Token>, QasmError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                Tok::Real(chars[start..i].iter().collect())
            } else {
                let s: String = chars[start..i].iter().collect();
                Tok::Int(s.parse().map_err(|_| syntax(l0, c0, format!("integer `{s}` too large")))?)
            }
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                if chars[i] == '\n' {
                    return Err(syntax(l0, c0, "unterminated string"));
                }
                i += 1;
            }
            if i == chars.len() {
                return Err(syntax(l0, c0, "unterminated string"));
            }
            i += 1;
            Tok::Str(chars[start + 1..i - 1].iter().collect())
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            i += 2;
            Tok::Sym("->")
        } else {
            i += 1;
            Tok::Sym(match c {
                ';' => ";",
                ',' => ",",
                '[' => "[",
                ']' => "]",
                '(' => "(",
                ')' => ")",
                '{' => "{",
                '}' => "}",
                _ => return Err(syntax(l0, c0, format!("unexpected character `{c}`"))),
            })
        };
        col += i - start;
        out.push(Token { tok, line: l0, col: c0 });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.col)).unwrap_or(self.end)
    }

    fn next(&mut self, what: &str) -> Result<Token, QasmError> {
        let (l, c) = self.here();
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| syntax(l, c, format!("expected {what}, found end of input")))?;
        self.pos += 1;
        Ok(t)
    }

    fn sym(&mut self, s: &'static str) -> Result<(), QasmError> {
        let t = self.next(&format!("`{s}`"))?;
        if t.tok == Tok::Sym(s) {
            Ok(())
        } else {
            Err(syntax(t.line, t.col, format!("expected `{s}`, found {}", describe(&t.tok))))
        }
    }

    fn ident(&mut self) -> Result<Token, QasmError> {
        let t = self.next("identifier")?;
        match t.tok {
            Tok::Ident(_) => Ok(t),
            _ => Err(syntax(t.line, t.col, format!("expected identifier, found {}", describe(&t.tok)))),
        }
    }

    fn int(&mut self) -> Result<usize, QasmError> {
        let t = self.next("integer")?;
        match t.tok {
            Tok::Int(v) => Ok(v),
            _ => Err(syntax(t.line, t.col, format!("expected integer, found {}", describe(&t.tok)))),
        }
    }

    /// `name[index]`
    fn indexed(&mut self) -> Result<(String, usize, usize, usize), QasmError> {
        let t = self.ident()?;
        let Tok::Ident(name) = t.tok else { unreachable!() };
        self.sym("[")?;
        let idx = self.int()?;
        self.sym("]")?;
        Ok((name, idx, t.line, t.col))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Real(s) => format!("`{s}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(s) => format!("`{s}`"),
    }
}

pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let toks = lex(text)?;
    let end = toks.last().map(|t| (t.line, t.col + 1)).unwrap_or((1, 1));
    let mut p = Parser { toks, pos: 0, end };
    let mut qreg: Option<(String, usize)> = None;
    let mut creg: Option<(String, usize)> = None;
    let mut circuit = Circuit::new(0);

    while let Some(t) = p.peek().cloned() {
        let Tok::Ident(word) = &t.tok else {
            return Err(syntax(t.line, t.col, format!("expected statement, found {}", describe(&t.tok))));
        };
        match word.as_str() {
            "OPENQASM" => {
                p.pos += 1;
                let v = p.next("version")?;
                match &v.tok {
                    Tok::Real(s) if s == "2.0" => {}
                    Tok::Int(2) => {}
                    other => return Err(syntax(v.line, v.col, format!("unsupported version {}", describe(other)))),
                }
                p.sym(";")?;
            }
            "include" => {
                p.pos += 1;
                let s = p.next("file name")?;
                if !matches!(s.tok, Tok::Str(_)) {
                    return Err(syntax(s.line, s.col, "expected file name string"));
                }
                p.sym(";")?;
            }
            "qreg" | "creg" => {
                p.pos += 1;
                let (name, size, _, _) = p.indexed()?;
                p.sym(";")?;
                if word == "qreg" {
                    if qreg.is_some() {
                        return Err(QasmError::MultipleQuantumRegisters { line: t.line, col: t.col });
                    }
                    circuit.num_qubits = size;
                    qreg = Some((name, size));
                } else {
                    if creg.is_some() {
                        return Err(QasmError::MultipleClassicalRegisters { line: t.line, col: t.col });
                    }
                    circuit.num_clbits = size;
                    creg = Some((name, size));
                }
            }
            _ => {
                p.pos += 1;
                let Some(kind) = GateKind::from_qasm_name(word) else {
                    return Err(QasmError::UnsupportedGate { line: t.line, col: t.col, name: word.clone() });
                };
                let Some((qname, qsize)) = qreg.clone() else {
                    return Err(QasmError::NoQuantumRegister);
                };
                let operand = |p: &mut Parser| -> Result<usize, QasmError> {
                    let (name, idx, line, col) = p.indexed()?;
                    if name != qname {
                        return Err(QasmError::UnknownRegister { line, col, name });
                    }
                    if idx >= qsize {
                        return Err(QasmError::OutOfBounds { line, col, reg: name, index: idx, size: qsize });
                    }
                    Ok(idx)
                };
                if kind.is_measure() {
                    let q = operand(&mut p)?;
                    p.sym("->")?;
                    let (name, idx, line, col) = p.indexed()?;
                    let Some((cname, csize)) = creg.clone() else {
                        return Err(QasmError::UnknownRegister { line, col, name });
                    };
                    if name != cname {
                        return Err(QasmError::UnknownRegister { line, col, name });
                    }
                    if idx >= csize {
                        return Err(QasmError::OutOfBounds { line, col, reg: name, index: idx, size: csize });
                    }
                    p.sym(";")?;
                    circuit.gates.push(Gate::measure(q));
                    circuit.clbits.push(idx as u32);
                } else {
                    let mut qs = vec![operand(&mut p)?];
                    for _ in 1..kind.arity() {
                        p.sym(",")?;
                        qs.push(operand(&mut p)?);
                    }
                    p.sym(";")?;
                    if qs.len() == 2 && qs[0] == qs[1] {
                        return Err(QasmError::RepeatedOperand { line: t.line, col: t.col, name: word.clone() });
                    }
                    circuit.gates.push(Gate::new(kind, &qs));
                }
            }
        }
    }
    if qreg.is_none() {
        return Err(QasmError::NoQuantumRegister);
    }
    Ok(circuit)
}

pub fn emit_qasm(circuit: &Circuit) -> String {
    let mut s = String::with_capacity(32 + circuit.gates.len() * 16);
    s.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(s, "qreg q[{}];", circuit.num_qubits);
    if circuit.num_clbits > 0 {
        let _ = writeln!(s, "creg c[{}];", circuit.num_clbits);
    }
    let mut m = 0;
    for g in &circuit.gates {
        match g.kind {
            GateKind::Measure => {
                let _ = writeln!(s, "measure q[{}] -> c[{}];", g.q0(), circuit.clbits[m]);
                m += 1;
            }
            k if k.arity() == 2 => {
                let _ = writeln!(s, "{} q[{}],q[{}];", k.qasm_name(), g.q0(), g.q1());
            }
            k => {
                let _ = writeln!(s, "{} q[{}];", k.qasm_name(), g.q0());
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";

    #[test]
    fn bell() {
        let c = parse_qasm(&format!("{HEAD}qreg q[2];\nh q[0];\ncx q[0],q[1];\n")).unwrap();
        assert_eq!(c.num_qubits, 2);
        assert_eq!(c.gates, vec![Gate::one(GateKind::H, 0), Gate::two(GateKind::Cx, 0, 1)]);
    }

    #[test]
    fn t_gate_rejected() {
        let e = parse_qasm(&format!("{HEAD}qreg q[1];\nt q[0];\n")).unwrap_err();
        assert_eq!(e, QasmError::UnsupportedGate { line: 4, col: 1, name: "t".into() });
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_qasm(&format!("{HEAD}qreg q[2];\nh q[5];\n")).unwrap_err();
        assert!(matches!(e, QasmError::OutOfBounds { line: 4, col: 3, index: 5, size: 2, .. }));
        let e = parse_qasm(&format!("{HEAD}qreg q[2];\nqreg r[2];\n")).unwrap_err();
        assert!(matches!(e, QasmError::MultipleQuantumRegisters { line: 4, .. }));
        let e = parse_qasm(&format!("{HEAD}qreg q[2];\nh q[0]\nh q[1];")).unwrap_err();
        assert!(matches!(e, QasmError::Syntax { line: 5, col: 1, .. }), "{e}");
        let e = parse_qasm(&format!("{HEAD}qreg q[2];\ncx q[1],q[1];\n")).unwrap_err();
        assert!(matches!(e, QasmError::RepeatedOperand { .. }));
    }

    #[test]
    fn measure_and_comments() {
        let src = format!("{HEAD}// comment\nqreg q[3];\ncreg c[3];\nh q[2]; // trailing\nmeasure q[2] -> c[0];\n");
        let c = parse_qasm(&src).unwrap();
        assert_eq!(c.gates, vec![Gate::one(GateKind::H, 2), Gate::measure(2)]);
        assert_eq!(c.clbits, vec![0]);
        assert_eq!(parse_qasm(&emit_qasm(&c)).unwrap(), c);
    }

    #[test]
    fn emit_empty_and_single() {
        let c = Circuit::new(3);
        assert_eq!(emit_qasm(&c), format!("{HEAD}qreg q[3];\n"));
        let mut c = Circuit::new(1);
        c.push(Gate::one(GateKind::H, 0));
        assert!(emit_qasm(&c).contains("h q[0];"));
    }
}
