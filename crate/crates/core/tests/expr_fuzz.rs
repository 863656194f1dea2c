use germlab::expr::parse;
use proptest::prelude::*;

/// Evaluates while parsing, with no intermediate tree.
struct Reference<'a> {
    s: &'a [u8],
    i: usize,
    vars: &'a [f64],
}

type R = Result<f64, ()>;

fn fin(v: f64) -> R {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(())
    }
}

impl Reference<'_> {
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i] == b' ' {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> R {
        let mut v = self.term();
        loop {
            if self.eat(b'+') {
                let r = self.term();
                v = v.and_then(|a| r.and_then(|b| fin(a + b)));
            } else if self.eat(b'-') {
                let r = self.term();
                v = v.and_then(|a| r.and_then(|b| fin(a - b)));
            } else {
                return v;
            }
        }
    }

    fn term(&mut self) -> R {
        let mut v = self.factor();
        loop {
            if self.eat(b'*') {
                let r = self.factor();
                v = v.and_then(|a| r.and_then(|b| fin(a * b)));
            } else if self.eat(b'/') {
                let r = self.factor();
                v = v.and_then(|a| r.and_then(|b| if b == 0.0 { Err(()) } else { fin(a / b) }));
            } else {
                return v;
            }
        }
    }

    fn factor(&mut self) -> R {
        if self.eat(b'-') {
            return self.factor().map(|v| -v);
        }
        let base = self.atom();
        if self.eat(b'^') {
            let e = self.factor();
            return base.and_then(|b| e.and_then(|e| fin(b.powf(e))));
        }
        base
    }

    fn atom(&mut self) -> R {
        self.ws();
        if self.eat(b'(') {
            let v = self.expr();
            assert!(self.eat(b')'));
            return v;
        }
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'.') {
            self.i += 1;
        }
        let word = std::str::from_utf8(&self.s[start..self.i]).unwrap();
        if let Ok(v) = word.parse::<f64>() {
            return Ok(v);
        }
        if let Some(k) = word.strip_prefix('x') {
            let k: usize = if k.is_empty() { 1 } else { k.parse().unwrap() };
            return Ok(self.vars[k - 1]);
        }
        assert!(self.eat(b'('));
        let a = self.expr();
        let b = if self.eat(b',') { Some(self.expr()) } else { None };
        assert!(self.eat(b')'));
        let a = a?;
        match word {
            "abs" => Ok(a.abs()),
            "sqrt" if a < 0.0 => Err(()),
            "sqrt" => Ok(a.sqrt()),
            "log" if a <= 0.0 => Err(()),
            "log" => Ok(a.ln()),
            "sin" => Ok(a.sin()),
            "cos" => Ok(a.cos()),
            "min" => Ok(a.min(b.unwrap()?)),
            "max" => Ok(a.max(b.unwrap()?)),
            other => panic!("generator produced {other}"),
        }
    }
}

fn reference(src: &str, vars: &[f64]) -> R {
    let mut r = Reference { s: src.as_bytes(), i: 0, vars };
    let v = r.expr();
    assert_eq!(r.peek(), None, "reference did not consume {src}");
    v
}

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        (0u32..1000).prop_map(|n| format!("{}", n as f64 / 8.0)),
        (1usize..=3).prop_map(|k| format!("x{k}")),
        Just("x".to_string()),
    ]
}

fn source() -> impl Strategy<Value = String> {
    leaf().prop_recursive(5, 40, 3, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "^"]), inner.clone())
                .prop_map(|(a, op, b)| format!("{a} {op} {b}")),
            inner.clone().prop_map(|a| format!("({a})")),
            inner.clone().prop_map(|a| format!("-{a}")),
            (prop::sample::select(vec!["abs", "sqrt", "log", "sin", "cos"]), inner.clone())
                .prop_map(|(f, a)| format!("{f}({a})")),
            (prop::sample::select(vec!["min", "max"]), inner.clone(), inner)
                .prop_map(|(f, a, b)| format!("{f}({a}, {b})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn evaluation_matches_reference(src in source(), vars in prop::array::uniform3(-2.0f64..2.0)) {
        let e = parse(&src).unwrap();
        let got = e.eval(&vars).map_err(|_| ());
        let want = reference(&src, &vars);
        match (got, want) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits(), "{} -> {} vs {}", src, a, b),
            (Err(()), Err(())) => {}
            (a, b) => prop_assert!(false, "{}: {:?} vs {:?}", src, a, b),
        }
    }

    #[test]
    fn print_parse_fixed_point(src in source()) {
        let e = parse(&src).unwrap();
        let printed = e.to_string();
        prop_assert_eq!(parse(&printed).unwrap(), e);
    }
}
