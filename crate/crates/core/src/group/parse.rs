//! Text forms: group specifiers (`Z^2`, `F2xZ`, `Z2wrZ`, ...) and element literals.
//!
//! Specifier grammar, `x` associating to the left and binding looser than `wr`:
//!
//! ```text
//! product := wreath ('x' wreath)*
//! wreath  := atom ('wr' atom)*
//! atom    := 'Z^' n | 'Z' n | 'Z' | 'F' n | 'H3' | '(' product ')'
//! ```

use smallvec::SmallVec;

use super::{Group, GroupDescriptor, GroupElement, GroupError, Kind};

struct Cursor<'a> {
    text: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            text,
            chars: text.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.chars.get(self.pos + i) == Some(&c))
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Option<u64> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        self.chars[start..self.pos].iter().collect::<String>().parse().ok()
    }

    fn signed(&mut self) -> Option<i64> {
        let negative = self.eat('-');
        if !negative {
            self.eat('+');
        }
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        let value: i64 = digits.parse().ok()?;
        Some(if negative { -value } else { value })
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }
}

fn spec_error(c: &Cursor<'_>, reason: impl Into<String>) -> GroupError {
    GroupError::Parse {
        text: c.text.to_string(),
        reason: reason.into(),
    }
}

pub(crate) fn parse_descriptor(text: &str) -> Result<GroupDescriptor, GroupError> {
    let mut c = Cursor::new(text);
    let d = product(&mut c)?;
    if !c.at_end() {
        return Err(spec_error(&c, format!("unexpected input at position {}", c.pos)));
    }
    Ok(d)
}

fn product(c: &mut Cursor<'_>) -> Result<GroupDescriptor, GroupError> {
    let mut left = wreath(c)?;
    while c.eat('x') {
        let right = wreath(c)?;
        left = GroupDescriptor::direct(left, right);
    }
    Ok(left)
}

fn wreath(c: &mut Cursor<'_>) -> Result<GroupDescriptor, GroupError> {
    let mut left = atom(c)?;
    while c.starts_with("wr") {
        c.pos += 2;
        let right = atom(c)?;
        left = GroupDescriptor::wreath(left, right);
    }
    Ok(left)
}

fn atom(c: &mut Cursor<'_>) -> Result<GroupDescriptor, GroupError> {
    match c.peek() {
        Some('(') => {
            c.pos += 1;
            let d = product(c)?;
            if !c.eat(')') {
                return Err(spec_error(c, "missing ')'"));
            }
            Ok(d)
        }
        Some('Z') => {
            c.pos += 1;
            if c.eat('^') {
                let d = c.number().ok_or_else(|| spec_error(c, "expected rank after 'Z^'"))?;
                let d = u32::try_from(d).map_err(|_| spec_error(c, "rank too large"))?;
                Ok(GroupDescriptor::Lattice(d))
            } else if let Some(m) = c.number() {
                Ok(GroupDescriptor::Cyclic(m))
            } else {
                Ok(GroupDescriptor::Lattice(1))
            }
        }
        Some('F') => {
            c.pos += 1;
            let k = c.number().ok_or_else(|| spec_error(c, "expected rank after 'F'"))?;
            let k = u32::try_from(k).map_err(|_| spec_error(c, "rank too large"))?;
            Ok(GroupDescriptor::Free(k))
        }
        Some('H') => {
            c.pos += 1;
            if c.number() == Some(3) {
                Ok(GroupDescriptor::Heisenberg)
            } else {
                Err(spec_error(c, "only H3 (the integer Heisenberg group) is supported"))
            }
        }
        Some(other) => Err(spec_error(c, format!("unexpected character {other:?}"))),
        None => Err(spec_error(c, "unexpected end of specifier")),
    }
}

impl Group {
    /// Parse an element literal in the same syntax as its `Display` form, or
    /// `hex:<canonical encoding>` for any group.
    ///
    /// Free-group words use lowercase letters for generators and uppercase for
    /// inverses (`aB` is a·b⁻¹); `e` is the identity.
    pub fn parse_element(&self, text: &str) -> Result<GroupElement, GroupError> {
        let trimmed = text.trim();
        if let Some(hex) = trimmed.strip_prefix("hex:") {
            let bytes = decode_hex(hex).ok_or_else(|| GroupError::ElementParse {
                text: text.to_string(),
                reason: "invalid hex".into(),
            })?;
            return self.decode(&bytes);
        }
        let mut c = Cursor::new(trimmed);
        let element = self.element_literal(&mut c).map_err(|reason| GroupError::ElementParse {
            text: text.to_string(),
            reason,
        })?;
        if !c.at_end() {
            return Err(GroupError::ElementParse {
                text: text.to_string(),
                reason: format!("trailing input at position {}", c.pos),
            });
        }
        self.check(&element)?;
        Ok(element)
    }

    fn element_literal(&self, c: &mut Cursor<'_>) -> Result<GroupElement, String> {
        match &self.kind {
            Kind::Cyclic(m) => {
                let v = c.signed().ok_or("expected integer")?;
                Ok(GroupElement::Cyclic(v.rem_euclid(*m as i64) as u64))
            }
            Kind::Lattice(d) => {
                let v = int_tuple(c, '(', ')')?;
                if v.len() != *d {
                    return Err(format!("expected {d} coordinates, got {}", v.len()));
                }
                Ok(GroupElement::Lattice(SmallVec::from_vec(v)))
            }
            Kind::Heisenberg => {
                let v = int_tuple(c, '[', ']')?;
                let abc: [i64; 3] = v.try_into().map_err(|_| "expected [a,b,c]".to_string())?;
                Ok(GroupElement::Heisenberg(abc))
            }
            Kind::Free(k) => {
                if c.eat('e') && !c.peek().is_some_and(|ch| ch.is_ascii_alphabetic()) {
                    return Ok(self.identity());
                }
                let mut word: SmallVec<[u8; 16]> = SmallVec::new();
                while let Some(ch) = c.peek() {
                    if !ch.is_ascii_alphabetic() {
                        break;
                    }
                    c.pos += 1;
                    let (index, inverse) = if ch.is_ascii_lowercase() {
                        (ch as u8 - b'a', false)
                    } else {
                        (ch as u8 - b'A', true)
                    };
                    if index as usize >= *k {
                        return Err(format!("letter {ch:?} exceeds rank {k}"));
                    }
                    let letter = 2 * index + inverse as u8;
                    if word.last().is_some_and(|&p| p ^ 1 == letter) {
                        word.pop();
                    } else {
                        word.push(letter);
                    }
                }
                Ok(GroupElement::Word(word))
            }
            Kind::Direct(l, r) => {
                expect(c, '<')?;
                let a = l.element_literal(c)?;
                expect(c, '|')?;
                let b = r.element_literal(c)?;
                expect(c, '>')?;
                Ok(GroupElement::pair(a, b))
            }
            Kind::Wreath { lamp, base } => {
                expect(c, '(')?;
                let position = base.element_literal(c)?;
                expect(c, ';')?;
                expect(c, '{')?;
                let mut lamps = Vec::new();
                if !c.eat('}') {
                    loop {
                        let k = base.element_literal(c)?;
                        expect(c, ':')?;
                        let v = lamp.element_literal(c)?;
                        lamps.push((k, v));
                        if c.eat('}') {
                            break;
                        }
                        expect(c, ',')?;
                    }
                }
                expect(c, ')')?;
                self.wreath_element(position, lamps).map_err(|e| e.to_string())
            }
        }
    }
}

fn expect(c: &mut Cursor<'_>, ch: char) -> Result<(), String> {
    if c.eat(ch) {
        Ok(())
    } else {
        Err(format!("expected {ch:?} at position {}", c.pos))
    }
}

fn int_tuple(c: &mut Cursor<'_>, open: char, close: char) -> Result<Vec<i64>, String> {
    expect(c, open)?;
    let mut v = Vec::new();
    if c.eat(close) {
        return Ok(v);
    }
    loop {
        v.push(c.signed().ok_or("expected integer")?);
        if c.eat(close) {
            return Ok(v);
        }
        expect(c, ',')?;
    }
}

pub(crate) fn decode_hex(hex: &str) -> Option<Vec<u8>> {
    if !hex.len().is_multiple_of(2) {
        return None;
    }
    (0..hex.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(hex.get(i..i + 2)?, 16).ok())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specifiers_round_trip() {
        for text in ["Z^2", "Z", "F2", "H3", "F2xZ", "Z2wrZ", "Z3wrZ^2", "(Z2wrZ)xZ", "Z2wr(F2xZ)"] {
            let d = parse_descriptor(text).unwrap();
            assert_eq!(d.to_string(), text);
            assert_eq!(parse_descriptor(&d.to_string()).unwrap(), d);
        }
        assert_eq!(
            parse_descriptor("Z2wrZ").unwrap(),
            GroupDescriptor::lamplighter()
        );
        assert_eq!(
            parse_descriptor("F2xZ").unwrap(),
            GroupDescriptor::direct(GroupDescriptor::Free(2), GroupDescriptor::Lattice(1))
        );
    }

    #[test]
    fn bad_specifiers() {
        for text in ["", "Q", "Z^", "F", "H4", "(Z", "Z2wr", "Z^2y"] {
            assert!(parse_descriptor(text).is_err(), "{text}");
        }
    }

    #[test]
    fn element_literals_round_trip() {
        let cases = [
            ("Z^2", "(3,-1)"),
            ("F2", "aB"),
            ("F2", "e"),
            ("H3", "[1,2,-3]"),
            ("F2xZ", "<ab|(4)>"),
            ("Z2wrZ", "((5);{(0):1,(1):1,(-2):1})"),
        ];
        for (g, text) in cases {
            let group = Group::parse(g).unwrap();
            let e = group.parse_element(text).unwrap();
            let again = group.parse_element(&e.to_string()).unwrap();
            assert_eq!(e, again);
            let hex: String = group.encode(&e).iter().map(|b| format!("{b:02x}")).collect();
            assert_eq!(group.parse_element(&format!("hex:{hex}")).unwrap(), e);
        }
    }
}
