use super::ExtReal;

/// Rescale the recurrence pair whenever a mantissa leaves [2^-500, 2^500].
const RESCALE_HI: f64 = 3.273_390_607_896_142e150;
const RESCALE_LO: f64 = 1.0 / RESCALE_HI;

/// Unevaluated sum hi + lo with |lo| ≤ ulp(hi)/2.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Dd {
            hi: s,
            lo: lo - (s - hi),
        }
    }

    fn add(self, o: Dd) -> Self {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let r = Dd::renorm(s.hi, s.lo + t.hi);
        Dd::renorm(r.hi, r.lo + t.lo)
    }

    fn neg(self) -> Self {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn mul(self, o: Dd) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::renorm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div_f64(self, d: f64) -> Self {
        let q1 = self.hi / d;
        let p = q1 * d;
        let e = q1.mul_add(d, -p);
        let r = (self.hi - p - e + self.lo) / d;
        Dd::renorm(q1, r)
    }

    fn scale(self, factor: f64) -> Self {
        Dd {
            hi: self.hi * factor,
            lo: self.lo * factor,
        }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Generalized Laguerre polynomials L_0^m(x), L_1^m(x), … by forward
/// three-term recurrence
///
/// ```text
/// n L_n^m = (2n − 1 + m − x) L_{n−1}^m − (n − 1 + m) L_{n−2}^m
/// ```
///
/// The two most recent values share a common log-scale so the recurrence
/// never overflows. They are carried in double-double arithmetic, which
/// keeps values near a root accurate relative to the value itself rather
/// than to the size of the oscillation. Each call to [`Iterator::next`]
/// costs one recurrence step.
#[derive(Debug, Clone)]
pub struct LaguerreSeq {
    m: f64,
    x: f64,
    n: u64,
    // mantissas of L_{n-1} and L_{n-2}, both scaled by exp(log_scale)
    prev: Dd,
    prev2: Dd,
    log_scale: f64,
}

impl LaguerreSeq {
    pub fn new(m: u32, x: f64) -> Self {
        LaguerreSeq {
            m: f64::from(m),
            x,
            n: 0,
            prev: Dd::default(),
            prev2: Dd::default(),
            log_scale: 0.0,
        }
    }

    /// Index of the next polynomial to be produced.
    pub fn next_index(&self) -> u64 {
        self.n
    }

    fn step(&mut self) -> ExtReal {
        let n = self.n;
        // integer parts are exact in f64 far beyond any reachable n
        let value = match n {
            0 => Dd::from_f64(1.0),
            1 => Dd::two_sum(1.0 + self.m, -self.x),
            _ => {
                let nf = n as f64;
                let a = Dd::two_sum(2.0 * nf - 1.0 + self.m, -self.x);
                let b = Dd::from_f64(nf - 1.0 + self.m);
                a.mul(self.prev).add(b.mul(self.prev2).neg()).div_f64(nf)
            }
        };
        self.prev2 = self.prev;
        self.prev = value;
        self.n += 1;

        let v = value.value();
        let out = ExtReal::from_parts(
            if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                0
            },
            v.abs().ln() + self.log_scale,
        );

        let mag = self.prev.hi.abs().max(self.prev2.hi.abs());
        if mag > RESCALE_HI || (mag < RESCALE_LO && mag > 0.0) {
            // power-of-two rescale keeps the mantissas exact
            let k = mag.log2().round() as i32;
            let factor = 2f64.powi(-k);
            self.prev = self.prev.scale(factor);
            self.prev2 = self.prev2.scale(factor);
            self.log_scale += f64::from(k) * std::f64::consts::LN_2;
        }
        out
    }
}

impl Iterator for LaguerreSeq {
    type Item = ExtReal;

    fn next(&mut self) -> Option<ExtReal> {
        Some(self.step())
    }
}

/// L_n^m(x) in extended range.
pub fn laguerre(n: u64, m: u32, x: f64) -> ExtReal {
    let mut seq = LaguerreSeq::new(m, x);
    for _ in 0..n {
        seq.step();
    }
    seq.step()
}
