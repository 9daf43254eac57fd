//! Closed double intervals with outward rounding.
//!
//! Rounding is done with error-free transformations: a sum or product is
//! nudged one ulp outward only when the floating result is inexact, so
//! exact arithmetic on representable values stays degenerate.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return s;
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return s;
    }
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

fn mul_err(a: f64, b: f64, p: f64) -> f64 {
    a.mul_add(b, -p)
}

pub fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return p;
    }
    let e = mul_err(a, b, p);
    if e < 0.0 || (p == 0.0 && (a < 0.0) != (b < 0.0)) {
        p.next_down()
    } else {
        p
    }
}

pub fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return p;
    }
    let e = mul_err(a, b, p);
    if e > 0.0 || (p == 0.0 && (a < 0.0) == (b < 0.0)) {
        p.next_up()
    } else {
        p
    }
}

/// Sign of `a/b - q` for a finite quotient `q`.
fn div_err_sign(a: f64, b: f64, q: f64) -> f64 {
    // a - q*b, exact via fma, has the sign of (a/b - q) * sign(b)
    let r = (-q).mul_add(b, a);
    if b < 0.0 {
        -r
    } else {
        r
    }
}

pub fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() || a.is_infinite() || b.is_infinite() {
        return q;
    }
    if div_err_sign(a, b, q) < 0.0 || (q == 0.0 && a != 0.0 && (a < 0.0) != (b < 0.0)) {
        q.next_down()
    } else {
        q
    }
}

pub fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() || a.is_infinite() || b.is_infinite() {
        return q;
    }
    if div_err_sign(a, b, q) > 0.0 || (q == 0.0 && a != 0.0 && (a < 0.0) == (b < 0.0)) {
        q.next_up()
    } else {
        q
    }
}

fn pow_down_pos(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, _| mul_down(acc, x))
}

fn pow_up_pos(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, _| mul_up(acc, x))
}

/// Largest double `r >= 0` with `r^n <= v` guaranteed.
fn root_down(v: f64, n: u32) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    if v.is_infinite() {
        return f64::MAX;
    }
    let mut r = if n == 2 { v.sqrt() } else { v.powf(1.0 / n as f64) };
    while r > 0.0 && pow_up_pos(r, n) > v {
        r = r.next_down();
    }
    r
}

/// Smallest double `r >= 0` with `r^n >= v` guaranteed.
fn root_up(v: f64, n: u32) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    if v.is_infinite() {
        return f64::INFINITY;
    }
    let mut r = if n == 2 { v.sqrt() } else { v.powf(1.0 / n as f64) };
    while pow_down_pos(r, n) < v {
        r = r.next_up();
        if r.is_infinite() {
            break;
        }
    }
    r
}

impl Interval {
    pub const ENTIRE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Interval {
        Interval { lo: v, hi: v }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn intersect(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.max(o.lo), hi: self.hi.min(o.hi) }
    }

    pub fn hull(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: add_down(self.lo, o.lo), hi: add_up(self.hi, o.hi) }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let (a, b) = (self, o);
        let cands = [(a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi)];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (x, y) in cands {
            // 0 * inf is taken as 0: the factor interval contains an exact zero
            lo = lo.min(mul_down(x, y));
            hi = hi.max(mul_up(x, y));
        }
        Interval { lo, hi }
    }

    /// Quotient; the entire line when the divisor contains zero.
    pub fn div(&self, o: &Interval) -> Interval {
        if o.contains_zero() {
            return Interval::ENTIRE;
        }
        let (a, b) = (self, o);
        let cands = [(a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi)];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (x, y) in cands {
            let (d, u) = if x.is_infinite() && y.is_infinite() {
                (f64::NEG_INFINITY, f64::INFINITY)
            } else {
                (div_down(x, y), div_up(x, y))
            };
            lo = lo.min(d);
            hi = hi.max(u);
        }
        Interval { lo, hi }
    }

    pub fn powi(&self, n: i32) -> Interval {
        if n == 0 {
            return Interval::point(1.0);
        }
        if n < 0 {
            return Interval::point(1.0).div(&self.powi(-n));
        }
        let n = n as u32;
        let up = |x: f64| {
            if x.is_infinite() {
                f64::INFINITY
            } else {
                pow_up_pos(x, n)
            }
        };
        let down = |x: f64| {
            if x.is_infinite() {
                f64::INFINITY
            } else {
                pow_down_pos(x, n)
            }
        };
        if n.is_multiple_of(2) {
            if self.lo >= 0.0 {
                Interval { lo: down(self.lo), hi: up(self.hi) }
            } else if self.hi <= 0.0 {
                Interval { lo: down(-self.hi), hi: up(-self.lo) }
            } else {
                Interval { lo: 0.0, hi: up(self.mag()) }
            }
        } else {
            let signed_down = |x: f64| if x >= 0.0 { down(x) } else { -up(-x) };
            let signed_up = |x: f64| if x >= 0.0 { up(x) } else { -down(-x) };
            Interval { lo: signed_down(self.lo), hi: signed_up(self.hi) }
        }
    }

    /// Values `v` with `v^n` in `self`, for `n >= 1`.
    pub fn root(&self, n: u32) -> Interval {
        if n.is_multiple_of(2) {
            let r = self.intersect(&Interval::new(0.0, f64::INFINITY));
            if r.is_empty() {
                return r;
            }
            let hi = root_up(r.hi, n);
            Interval { lo: -hi, hi }
        } else {
            let signed = |v: f64, up: bool| {
                if v >= 0.0 {
                    if up {
                        root_up(v, n)
                    } else {
                        root_down(v, n)
                    }
                } else if up {
                    -root_down(-v, n)
                } else {
                    -root_up(-v, n)
                }
            };
            Interval { lo: signed(self.lo, false), hi: signed(self.hi, true) }
        }
    }

    /// Values `v` with `v^n` in `self` (even `n`), intersected with `dom`,
    /// keeping the two symmetric branches apart when `dom` allows.
    pub fn even_root_within(&self, n: u32, dom: &Interval) -> Interval {
        let r = self.intersect(&Interval::new(0.0, f64::INFINITY));
        if r.is_empty() {
            return r;
        }
        let hi = root_up(r.hi, n);
        let lo = root_down(r.lo, n);
        let pos = Interval::new(lo, hi).intersect(dom);
        let neg = Interval::new(-hi, -lo).intersect(dom);
        match (pos.is_empty(), neg.is_empty()) {
            (true, true) => pos,
            (false, true) => pos,
            (true, false) => neg,
            (false, false) => pos.hull(&neg),
        }
    }
}
