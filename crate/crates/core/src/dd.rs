//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`
//! values with `|lo| ≤ ulp(hi) / 2`, giving about 32 significant digits.
//!
//! Addition and multiplication follow Joldes, Muller and Popescu (2017);
//! division uses two correction steps with exact FMA residuals; `exp` uses
//! argument reduction by `ln 2` and `2^9`, a Taylor series and repeated
//! squaring; `ln` is one Newton step on `exp`. Trigonometric and hyperbolic
//! functions are evaluated in double precision only.

use std::cmp::Ordering;
use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        DoubleDouble { hi, lo }
    }

    pub const fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    /// Nearest `f64`.
    pub fn approx(self) -> f64 {
        self.hi + self.lo
    }

    fn renormalized(hi: f64, lo: f64) -> Self {
        let (h, l) = fast_two_sum(hi, lo);
        DoubleDouble { hi: h, lo: l }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Self::renormalized(p, self.lo.mul_add(b, e))
    }

    fn mul_pow2(self, b: f64) -> Self {
        DoubleDouble {
            hi: self.hi * b,
            lo: self.lo * b,
        }
    }

    fn square(self) -> Self {
        self * self
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
}

impl From<DoubleDouble> for f64 {
    fn from(x: DoubleDouble) -> f64 {
        x.hi + x.lo
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == 0.0 {
            fmt::Display::fmt(&self.hi, f)
        } else {
            write!(f, "{} {:+e}", self.hi, self.lo)
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (sh, sl) = two_sum(self.hi, rhs.hi);
        let (th, tl) = two_sum(self.lo, rhs.lo);
        let (vh, vl) = fast_two_sum(sh, sl + th);
        Self::renormalized(vh, tl + vl)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (ch, cl1) = two_prod(self.hi, rhs.hi);
        let tl0 = self.lo * rhs.lo;
        let tl1 = self.hi.mul_add(rhs.lo, tl0);
        let cl2 = self.lo.mul_add(rhs.hi, tl1);
        Self::renormalized(ch, cl1 + cl2)
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        if !q1.is_finite() {
            return DoubleDouble::from_f64(q1);
        }
        let r = self - rhs.mul_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs.mul_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (h, l) = fast_two_sum(q1, q2);
        DoubleDouble { hi: h, lo: l } + DoubleDouble::from_f64(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        self - (self / rhs).trunc() * rhs
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for DoubleDouble {
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /, RemAssign rem_assign %);

impl Zero for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble::from_f64(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        DoubleDouble::from_f64(1.0)
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        s.parse::<f64>().map(DoubleDouble::from_f64)
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc();
        let hi = t.hi.to_i64()?;
        hi.checked_add(t.lo.to_i64()?)
    }
    fn to_u64(&self) -> Option<u64> {
        let v = self.to_i64()?;
        u64::try_from(v).ok()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
    fn to_f32(&self) -> Option<f32> {
        Some((self.hi + self.lo) as f32)
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n - hi as i64) as f64;
        Some(DoubleDouble::renormalized(hi, lo))
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(DoubleDouble::renormalized(hi, lo))
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(DoubleDouble::from_f64(n))
    }
    fn from_f32(n: f32) -> Option<Self> {
        Some(DoubleDouble::from_f64(n as f64))
    }
}

impl NumCast for DoubleDouble {
    fn from<T: ToPrimitive>(n: T) -> Option<Self> {
        n.to_f64().map(DoubleDouble::from_f64)
    }
}

macro_rules! dd_consts {
    ($($name:ident = ($hi:expr, $lo:expr)),* $(,)?) => {
        // leading parts are the f64 constants themselves, spelled out next to their tails
        #[allow(clippy::approx_constant)]
        impl FloatConst for DoubleDouble {
            $(
                fn $name() -> Self {
                    DoubleDouble::from_parts($hi, $lo)
                }
            )*
        }
    };
}

dd_consts! {
    PI = (3.141592653589793, 1.2246467991473532e-16),
    E = (2.718281828459045, 1.4456468917292502e-16),
    LN_2 = (0.6931471805599453, 2.3190468138462996e-17),
    LN_10 = (2.302585092994046, -2.1707562233822494e-16),
    SQRT_2 = (1.4142135623730951, -9.667293313452913e-17),
    FRAC_1_SQRT_2 = (0.7071067811865476, -4.833646656726457e-17),
    FRAC_1_PI = (0.3183098861837907, -1.9678676675182486e-17),
    FRAC_2_PI = (0.6366197723675814, -3.935735335036497e-17),
    FRAC_2_SQRT_PI = (1.1283791670955126, 1.533545961316588e-17),
    FRAC_PI_2 = (1.5707963267948966, 6.123233995736766e-17),
    FRAC_PI_3 = (1.0471975511965979, -1.072081766451091e-16),
    FRAC_PI_4 = (0.7853981633974483, 3.061616997868383e-17),
    FRAC_PI_6 = (0.5235987755982989, -5.360408832255455e-17),
    FRAC_PI_8 = (0.39269908169872414, 1.5308084989341915e-17),
    LOG10_E = (0.4342944819032518, 1.098319650216765e-17),
    LOG2_E = (1.4426950408889634, 2.0355273740931033e-17),
    LOG10_2 = (0.3010299956639812, -2.8037281277851704e-18),
    LOG2_10 = (3.321928094887362, 1.661617516973592e-16),
    TAU = (6.283185307179586, 2.4492935982947064e-16),
}

macro_rules! via_f64 {
    ($($name:ident),*) => {$(
        fn $name(self) -> Self {
            DoubleDouble::from_f64(self.approx().$name())
        }
    )*};
}

impl Float for DoubleDouble {
    fn nan() -> Self {
        DoubleDouble::from_f64(f64::NAN)
    }
    fn infinity() -> Self {
        DoubleDouble::from_f64(f64::INFINITY)
    }
    fn neg_infinity() -> Self {
        DoubleDouble::from_f64(f64::NEG_INFINITY)
    }
    fn neg_zero() -> Self {
        DoubleDouble::from_f64(-0.0)
    }
    fn min_value() -> Self {
        DoubleDouble::from_f64(f64::MIN)
    }
    fn min_positive_value() -> Self {
        DoubleDouble::from_f64(f64::MIN_POSITIVE)
    }
    fn max_value() -> Self {
        DoubleDouble::from_f64(f64::MAX)
    }
    fn epsilon() -> Self {
        // 2^-104
        DoubleDouble::from_f64(4.930380657631324e-32)
    }
    fn is_nan(self) -> bool {
        self.hi.is_nan() || self.lo.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.hi.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
    fn is_normal(self) -> bool {
        self.hi.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.hi.classify()
    }
    fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            DoubleDouble::renormalized(hi, self.lo.floor())
        } else {
            DoubleDouble::from_f64(hi)
        }
    }
    fn ceil(self) -> Self {
        let hi = self.hi.ceil();
        if hi == self.hi {
            DoubleDouble::renormalized(hi, self.lo.ceil())
        } else {
            DoubleDouble::from_f64(hi)
        }
    }
    fn round(self) -> Self {
        (self + DoubleDouble::from_f64(0.5 * self.signum().hi)).trunc()
    }
    fn trunc(self) -> Self {
        if self.hi >= 0.0 {
            self.floor()
        } else {
            self.ceil()
        }
    }
    fn fract(self) -> Self {
        self - self.trunc()
    }
    fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Self {
        if self.is_nan() {
            Self::nan()
        } else if self.hi > 0.0 || (self.hi == 0.0 && self.hi.is_sign_positive()) {
            Self::one()
        } else {
            -Self::one()
        }
    }
    fn is_sign_positive(self) -> bool {
        self.hi.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.hi.is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
    fn powi(self, n: i32) -> Self {
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base.square();
            e >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }
    fn powf(self, n: Self) -> Self {
        if self.is_zero() {
            return if n.is_zero() { Self::one() } else { Self::zero() };
        }
        (n * self.ln()).exp()
    }
    fn sqrt(self) -> Self {
        if self.hi < 0.0 {
            return Self::nan();
        }
        if self.hi == 0.0 {
            return Self::zero();
        }
        let x = 1.0 / self.hi.sqrt();
        let y = self.hi * x;
        let (sq, sq_err) = two_prod(y, y);
        let resid = (self - DoubleDouble::from_parts(sq, sq_err)).hi;
        let (h, l) = two_sum(y, resid * (x * 0.5));
        DoubleDouble::renormalized(h, l)
    }
    fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Self::infinity();
        }
        if self.hi < -745.0 {
            return Self::zero();
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return Self::one();
        }
        let ln2 = Self::LN_2();
        let k = (self.hi / ln2.hi).round();
        let r = (self - ln2.mul_f64(k)).mul_pow2(1.0 / 512.0);
        // exp(r) - 1 by Taylor series; |r| < 7e-4 so 10 terms reach 1e-38.
        let mut term = r;
        let mut sum = r;
        for i in 2..=11 {
            term = term * r / DoubleDouble::from_f64(i as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 * sum.hi.abs() {
                break;
            }
        }
        // (1 + s)^2 - 1 = 2s + s^2, nine times.
        for _ in 0..9 {
            sum = sum.mul_pow2(2.0) + sum.square();
        }
        let e = sum + Self::one();
        let scale = 2f64.powi(k as i32);
        if scale.is_finite() && scale != 0.0 {
            e.mul_pow2(scale)
        } else {
            e.mul_pow2(2f64.powi(k as i32 / 2)).mul_pow2(2f64.powi(k as i32 - k as i32 / 2))
        }
    }
    fn exp2(self) -> Self {
        (self * Self::LN_2()).exp()
    }
    fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Self::neg_infinity() } else { Self::nan() };
        }
        if self.hi.is_infinite() {
            return self;
        }
        let x = DoubleDouble::from_f64(self.hi.ln());
        x + self * (-x).exp() - Self::one()
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        self.ln() / Self::LN_2()
    }
    fn log10(self) -> Self {
        self.ln() / Self::LN_10()
    }
    fn max(self, other: Self) -> Self {
        if self.is_nan() || other > self {
            other
        } else {
            self
        }
    }
    fn min(self, other: Self) -> Self {
        if self.is_nan() || other < self {
            other
        } else {
            self
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        if self > other {
            self - other
        } else {
            Self::zero()
        }
    }
    fn cbrt(self) -> Self {
        if self.is_zero() {
            return self;
        }
        let y = DoubleDouble::from_f64(self.approx().cbrt());
        // One Newton step: y - (y^3 - x) / (3 y^2).
        y - (y * y * y - self) / (DoubleDouble::from_f64(3.0) * y * y)
    }
    fn hypot(self, other: Self) -> Self {
        (self * self + other * other).sqrt()
    }
    via_f64!(sin, cos, tan, asin, acos, atan, sinh, cosh, tanh, asinh, acosh, atanh);
    fn atan2(self, other: Self) -> Self {
        DoubleDouble::from_f64(self.approx().atan2(other.approx()))
    }
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
    fn exp_m1(self) -> Self {
        if self.hi.abs() < 1e-3 {
            let mut term = self;
            let mut sum = self;
            for i in 2..=16 {
                term = term * self / DoubleDouble::from_f64(i as f64);
                sum = sum + term;
            }
            sum
        } else {
            self.exp() - Self::one()
        }
    }
    fn ln_1p(self) -> Self {
        (Self::one() + self).ln()
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.hi.integer_decode()
    }
}
