//! The registry of pointwise functions usable in `apply[f](...)`.
//!
//! Comparisons and boolean connectives return 1 or 0. Booleans treat any
//! nonzero value as true. Partial functions are made total: division by
//! zero yields 0, and so does `div_sqrt` when its second argument is not a
//! positive real. Ordering comparisons (`le`, `lt`, `gt0`, `monus`) yield 0
//! when an argument is not real; `eq` and `nz` compare complex values.
//!
//! Constants are written `const:<c>` where `c` is accepted by
//! [`crate::scalar::parse_gauss`], e.g. `const:7`, `const:-1/2`,
//! `const:0.15` or `const:1+2i`. They take one argument and ignore it.

use crate::scalar::{parse_gauss, GaussRat, Scalar, Tower};
use num::complex::Complex64;
use std::cmp::Ordering;
use thiserror::Error;

/// Registry entry for a builtin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuiltinFn {
    pub name: &'static str,
    pub arity: usize,
    /// Whether the function is available in the exact tower.
    pub exact: bool,
    pub summary: &'static str,
}

const fn b(name: &'static str, arity: usize, exact: bool, summary: &'static str) -> BuiltinFn {
    BuiltinFn {
        name,
        arity,
        exact,
        summary,
    }
}

const REGISTRY: &[BuiltinFn] = &[
    b("add", 2, true, "x + y"),
    b("sub", 2, true, "x - y"),
    b("mul", 2, true, "x * y"),
    b("div", 2, true, "x / y, 0 when y = 0"),
    b("recip", 1, true, "1 / x, 0 when x = 0"),
    b("recip1p", 1, true, "1 / (x + 1), 0 when x = -1"),
    b("monus", 2, true, "x - y when x >= y, else 0"),
    b("le", 2, true, "1 if x <= y"),
    b("lt", 2, true, "1 if x < y"),
    b("eq", 2, true, "1 if x = y"),
    b("nz", 1, true, "1 if x != 0"),
    b("gt0", 1, true, "1 if x > 0"),
    b("and", 2, true, "1 if x != 0 and y != 0"),
    b("or", 2, true, "1 if x != 0 or y != 0"),
    b("not", 1, true, "1 if x = 0"),
    b("andnot", 2, true, "1 if x != 0 and y = 0"),
    b("conj", 1, true, "complex conjugate"),
    b("re", 1, true, "real part"),
    b("im", 1, true, "imaginary part"),
    b("id", 1, true, "x"),
    b("div_sqrt", 2, false, "x / sqrt(y) for real y > 0, else 0"),
];

/// The fixed registry, excluding the `const:` family.
pub fn registry() -> &'static [BuiltinFn] {
    REGISTRY
}

pub fn lookup(name: &str) -> Option<&'static BuiltinFn> {
    REGISTRY.iter().find(|f| f.name == name)
}

/// The value of a `const:` builtin name.
pub fn parse_const(name: &str) -> Option<GaussRat> {
    parse_gauss(name.strip_prefix("const:")?)
}

/// Arity of a builtin, or `None` if the name is unknown.
pub fn arity(name: &str) -> Option<usize> {
    if name.starts_with("const:") {
        return parse_const(name).map(|_| 1);
    }
    lookup(name).map(|f| f.arity)
}

/// Whether `name` may be used in the exact tower.
pub fn is_exact(name: &str) -> bool {
    parse_const(name).is_some() || lookup(name).is_some_and(|f| f.exact)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BuiltinError {
    #[error("unknown function `{0}`")]
    Unknown(String),
    #[error("`{name}` takes {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("`{0}` is not available in the exact tower")]
    NotExact(String),
}

fn truth<T: Scalar>(b: bool) -> T {
    if b {
        T::one()
    } else {
        T::zero()
    }
}

/// Applies builtin `name` to `args`. `tol` is the zero tolerance of the
/// float tower and is ignored by the exact tower.
pub fn apply<T: Scalar>(name: &str, args: &[T], tol: f64) -> Result<T, BuiltinError> {
    if let Some(c) = parse_const(name) {
        return Ok(T::from_gauss(&c));
    }
    let f = lookup(name).ok_or_else(|| BuiltinError::Unknown(name.to_string()))?;
    if f.arity != args.len() {
        return Err(BuiltinError::Arity {
            name: name.to_string(),
            expected: f.arity,
            got: args.len(),
        });
    }
    let nz = |x: &T| !x.is_zero_tol(tol);
    let x = &args[0];
    let y = args.get(1);
    let y = || y.expect("arity checked");
    Ok(match f.name {
        "add" => x.add(y()),
        "sub" => x.sub(y()),
        "mul" => x.mul(y()),
        "div" => x.div(y(), tol),
        "recip" => x.inv(tol),
        "recip1p" => x.add(&T::one()).inv(tol),
        "monus" => match x.cmp_real(y(), tol) {
            Some(Ordering::Greater) => x.sub(y()).re(),
            _ => T::zero(),
        },
        "le" => truth(matches!(
            x.cmp_real(y(), tol),
            Some(Ordering::Less | Ordering::Equal)
        )),
        "lt" => truth(x.cmp_real(y(), tol) == Some(Ordering::Less)),
        "eq" => truth(x.eq_tol(y(), tol)),
        "nz" => truth(nz(x)),
        "gt0" => truth(x.cmp_real(&T::zero(), tol) == Some(Ordering::Greater)),
        "and" => truth(nz(x) && nz(y())),
        "or" => truth(nz(x) || nz(y())),
        "not" => truth(!nz(x)),
        "andnot" => truth(nz(x) && !nz(y())),
        "conj" => x.conj(),
        "re" => x.re(),
        "im" => x.im(),
        "id" => x.clone(),
        "div_sqrt" => {
            if T::TOWER == Tower::Exact {
                return Err(BuiltinError::NotExact(name.to_string()));
            }
            match y().cmp_real(&T::zero(), tol) {
                Some(Ordering::Greater) => {
                    let root = y().to_c64().re.sqrt();
                    let r = T::from_c64(Complex64::new(root, 0.0)).expect("float tower");
                    x.div(&r, tol)
                }
                _ => T::zero(),
            }
        }
        other => unreachable!("registry entry `{other}` has no semantics"),
    })
}
