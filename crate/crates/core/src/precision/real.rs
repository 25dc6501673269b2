use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{LazyLock, RwLock};

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Smallest precision a [`Real`] is ever created with.
pub const MIN_PRECISION: u32 = 64;

const LOG10_2: f64 = std::f64::consts::LOG10_2;

/// Arbitrary-precision real scalar.
///
/// Binary operations between two `Real`s are evaluated at the larger of the
/// two operand precisions; operations with machine integers keep the
/// precision of the `Real` operand.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(Float);

impl Real {
    fn clamp(prec: u32) -> u32 {
        prec.max(MIN_PRECISION)
    }

    pub fn zero(prec: u32) -> Real {
        Real(Float::new(Self::clamp(prec)))
    }

    pub fn one(prec: u32) -> Real {
        Real::from_int(1, prec)
    }

    pub fn from_int(v: i64, prec: u32) -> Real {
        Real(Float::with_val(Self::clamp(prec), v))
    }

    /// Exact conversion of a binary double (no decimal rounding is implied).
    pub fn from_f64(v: f64, prec: u32) -> Real {
        Real(Float::with_val(Self::clamp(prec), v))
    }

    /// `num / den` rounded once at `prec`.
    pub fn ratio(num: i64, den: i64, prec: u32) -> Real {
        let p = Self::clamp(prec);
        Real(Float::with_val(p, num) / den)
    }

    /// Parses a decimal string (`"0.3"`, `"1e-8"`, `"-2.5e3"`).
    pub fn parse(text: &str, prec: u32) -> Result<Real> {
        let parsed = Float::parse(text.trim())
            .map_err(|e| Error::InvalidInput(format!("cannot parse {text:?} as a real: {e}")))?;
        Ok(Real(Float::with_val(Self::clamp(prec), parsed)))
    }

    pub fn from_float(value: Float) -> Real {
        if value.prec() < MIN_PRECISION {
            let mut v = value;
            v.set_prec(MIN_PRECISION);
            Real(v)
        } else {
            Real(value)
        }
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Same value rounded (or exactly widened) to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Real {
        Real(Float::with_val(Self::clamp(prec), &self.0))
    }

    pub fn pi(prec: u32) -> Real {
        Real(constant(ConstKind::Pi, Self::clamp(prec)))
    }

    pub fn sqrt_pi(prec: u32) -> Real {
        Real(constant(ConstKind::SqrtPi, Self::clamp(prec)))
    }

    pub fn exp(&self) -> Real {
        Real(self.0.clone().exp())
    }

    pub fn ln(&self) -> Real {
        Real(self.0.clone().ln())
    }

    pub fn sqrt(&self) -> Real {
        Real(self.0.clone().sqrt())
    }

    pub fn abs(&self) -> Real {
        Real(self.0.clone().abs())
    }

    pub fn square(&self) -> Real {
        Real(self.0.clone().square())
    }

    pub fn powi(&self, k: i32) -> Real {
        Real(Float::with_val(self.prec(), (&self.0).pow(k)))
    }

    pub fn pow(&self, e: &Real) -> Real {
        let p = self.prec().max(e.prec());
        Real(Float::with_val(p, (&self.0).pow(&e.0)))
    }

    /// Complete Gamma function.
    pub fn gamma(&self) -> Real {
        Real(self.0.clone().gamma())
    }

    pub fn recip(&self) -> Real {
        Real(self.0.clone().recip())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.cmp0() == Some(Ordering::Greater)
    }

    pub fn is_negative(&self) -> bool {
        self.0.cmp0() == Some(Ordering::Less)
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// `log10 |x|`, valid far outside the `f64` range; `-inf` for zero.
    pub fn log10_abs(&self) -> f64 {
        if self.0.is_zero() {
            return f64::NEG_INFINITY;
        }
        let small = Float::with_val(64, self.0.abs_ref());
        small.log10().to_f64()
    }

    /// Decimal scientific notation with `digits` significant digits.
    pub fn to_sci(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        format!("{:.*e}", digits.max(1), self.0)
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Largest absolute value among `values` (zero for an empty slice).
    pub fn max_abs<'a>(values: impl IntoIterator<Item = &'a Real>) -> Real {
        let mut best: Option<Real> = None;
        for v in values {
            let a = v.abs();
            best = match best {
                Some(b) if b >= a => Some(b),
                _ => Some(a),
            };
        }
        best.unwrap_or_else(|| Real::zero(MIN_PRECISION))
    }

    pub fn sum<'a>(values: impl IntoIterator<Item = &'a Real>, prec: u32) -> Real {
        let mut acc = Real::zero(prec);
        for v in values {
            acc += v;
        }
        acc
    }
}

/// Number of leading decimal digits on which `x` and `y` agree, measured as
/// `-log10(|x - y| / max(|x|, |y|))`. Identical values return the digit
/// capacity of the coarser operand.
pub fn agreement_digits(x: &Real, y: &Real) -> u32 {
    let cap = (x.prec().min(y.prec()) as f64 * LOG10_2).floor() as u32;
    let diff = (x - y).abs();
    if diff.is_zero() {
        return cap;
    }
    let scale = x.abs().max(y.abs());
    if scale.is_zero() {
        return cap;
    }
    let rel = (&diff / &scale).log10_abs();
    if rel >= 0.0 {
        0
    } else {
        ((-rel).floor() as u32).min(cap)
    }
}

/// Approximate decimal digit capacity of a binary precision.
pub fn bits_to_digits(bits: u32) -> u32 {
    (bits as f64 * LOG10_2).floor() as u32
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({}, {} bits)", self.to_sci(25), self.prec())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(d) => f.write_str(&self.to_sci(d)),
            None => f.write_str(&self.to_sci(bits_to_digits(self.prec()) as usize)),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum ConstKind {
    Pi,
    SqrtPi,
}

static CONSTANTS: LazyLock<RwLock<HashMap<(ConstKind, u32), Float>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

fn constant(kind: ConstKind, prec: u32) -> Float {
    if let Some(v) = CONSTANTS
        .read()
        .expect("constant table poisoned")
        .get(&(kind, prec))
    {
        return v.clone();
    }
    let value = match kind {
        ConstKind::Pi => Float::with_val(prec, Constant::Pi),
        ConstKind::SqrtPi => {
            let guard = prec + 32;
            let v = Float::with_val(guard, Constant::Pi).sqrt();
            Float::with_val(prec, v)
        }
    };
    CONSTANTS
        .write()
        .expect("constant table poisoned")
        .entry((kind, prec))
        .or_insert(value)
        .clone()
}

macro_rules! real_binop {
    ($Trait:ident, $method:ident, $Assign:ident, $assign:ident) => {
        impl $Trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let p = self.prec().max(rhs.prec());
                Real(Float::with_val(p, $Trait::$method(&self.0, &rhs.0)))
            }
        }
        impl $Trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                $Trait::$method(&self, &rhs)
            }
        }
        impl $Trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                $Trait::$method(&self, rhs)
            }
        }
        impl $Trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                $Trait::$method(self, &rhs)
            }
        }
        impl $Trait<i64> for &Real {
            type Output = Real;
            fn $method(self, rhs: i64) -> Real {
                Real(Float::with_val(self.prec(), $Trait::$method(&self.0, rhs)))
            }
        }
        impl $Trait<i64> for Real {
            type Output = Real;
            fn $method(self, rhs: i64) -> Real {
                $Trait::$method(&self, rhs)
            }
        }
        impl $Trait<&Real> for i64 {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real(Float::with_val(rhs.prec(), $Trait::$method(self, &rhs.0)))
            }
        }
        impl $Trait<Real> for i64 {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                $Trait::$method(self, &rhs)
            }
        }
        impl $Assign<&Real> for Real {
            fn $assign(&mut self, rhs: &Real) {
                if rhs.prec() > self.prec() {
                    self.0.set_prec(rhs.prec());
                }
                $Assign::$assign(&mut self.0, &rhs.0);
            }
        }
        impl $Assign<Real> for Real {
            fn $assign(&mut self, rhs: Real) {
                $Assign::$assign(self, &rhs);
            }
        }
        impl $Assign<i64> for Real {
            fn $assign(&mut self, rhs: i64) {
                $Assign::$assign(&mut self.0, rhs);
            }
        }
    };
}

real_binop!(Add, add, AddAssign, add_assign);
real_binop!(Sub, sub, SubAssign, sub_assign);
real_binop!(Mul, mul, MulAssign, mul_assign);
real_binop!(Div, div, DivAssign, div_assign);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(Float::with_val(self.prec(), -&self.0))
    }
}
