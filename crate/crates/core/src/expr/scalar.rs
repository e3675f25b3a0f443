//! Number types the tape can be evaluated over: plain values, a univariate
//! second-order jet, and a dense multivariate second-order dual.

pub trait Scalar: Clone {
    /// Highest derivative order carried.
    const ORDER: u8;
    fn constant(c: f64) -> Self;
    fn value(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Compose with a scalar function; `f(v, order)` returns `[f, f', f'']` at `v`
    /// (entries above `order` may be left zero).
    fn chain(&self, f: impl Fn(f64, u8) -> [f64; 3]) -> Self;
    fn div(&self, o: &Self) -> Self {
        self.mul(&o.chain(|v, _| [1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)]))
    }
}

impl Scalar for f64 {
    const ORDER: u8 = 0;
    fn constant(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn chain(&self, f: impl Fn(f64, u8) -> [f64; 3]) -> Self {
        f(*self, 0)[0]
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
}

/// Value, first and second derivative along one variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: f64,
    pub dd: f64,
}

impl Jet {
    pub fn var(v: f64) -> Self {
        Jet { v, d: 1.0, dd: 0.0 }
    }
}

impl Scalar for Jet {
    const ORDER: u8 = 2;
    fn constant(c: f64) -> Self {
        Jet { v: c, d: 0.0, dd: 0.0 }
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn add(&self, o: &Self) -> Self {
        Jet { v: self.v + o.v, d: self.d + o.d, dd: self.dd + o.dd }
    }
    fn sub(&self, o: &Self) -> Self {
        Jet { v: self.v - o.v, d: self.d - o.d, dd: self.dd - o.dd }
    }
    fn mul(&self, o: &Self) -> Self {
        Jet {
            v: self.v * o.v,
            d: self.d * o.v + self.v * o.d,
            dd: self.dd * o.v + 2.0 * self.d * o.d + self.v * o.dd,
        }
    }
    fn neg(&self) -> Self {
        Jet { v: -self.v, d: -self.d, dd: -self.dd }
    }
    fn chain(&self, f: impl Fn(f64, u8) -> [f64; 3]) -> Self {
        let [f0, f1, f2] = f(self.v, 2);
        Jet { v: f0, d: f1 * self.d, dd: f1 * self.dd + f2 * self.d * self.d }
    }
}

/// Second-order multivariate dual number. Empty derivative storage means
/// "constant" so literals need not know the dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub g: Vec<f64>,
    /// Row-major k×k.
    pub h: Vec<f64>,
}

impl Dual2 {
    pub fn var(v: f64, i: usize, k: usize) -> Self {
        let mut g = vec![0.0; k];
        g[i] = 1.0;
        Dual2 { v, g, h: vec![0.0; k * k] }
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    fn zip_lin(&self, o: &Self, a: f64, b: f64, v: f64) -> Self {
        match (self.g.is_empty(), o.g.is_empty()) {
            (true, true) => Dual2::constant(v),
            (false, true) => Dual2 {
                v,
                g: self.g.iter().map(|x| a * x).collect(),
                h: self.h.iter().map(|x| a * x).collect(),
            },
            (true, false) => Dual2 {
                v,
                g: o.g.iter().map(|x| b * x).collect(),
                h: o.h.iter().map(|x| b * x).collect(),
            },
            (false, false) => Dual2 {
                v,
                g: self.g.iter().zip(&o.g).map(|(x, y)| a * x + b * y).collect(),
                h: self.h.iter().zip(&o.h).map(|(x, y)| a * x + b * y).collect(),
            },
        }
    }
}

impl Scalar for Dual2 {
    const ORDER: u8 = 2;
    fn constant(c: f64) -> Self {
        Dual2 { v: c, g: Vec::new(), h: Vec::new() }
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn add(&self, o: &Self) -> Self {
        self.zip_lin(o, 1.0, 1.0, self.v + o.v)
    }
    fn sub(&self, o: &Self) -> Self {
        self.zip_lin(o, 1.0, -1.0, self.v - o.v)
    }
    fn neg(&self) -> Self {
        self.zip_lin(self, -1.0, 0.0, -self.v)
    }
    fn mul(&self, o: &Self) -> Self {
        if self.g.is_empty() || o.g.is_empty() {
            return self.zip_lin(o, o.v, self.v, self.v * o.v);
        }
        let k = self.g.len();
        let mut r = self.zip_lin(o, o.v, self.v, self.v * o.v);
        for i in 0..k {
            for j in 0..k {
                r.h[i * k + j] += self.g[i] * o.g[j] + o.g[i] * self.g[j];
            }
        }
        r
    }
    fn chain(&self, f: impl Fn(f64, u8) -> [f64; 3]) -> Self {
        let [f0, f1, f2] = f(self.v, 2);
        if self.g.is_empty() {
            return Dual2::constant(f0);
        }
        let k = self.g.len();
        let mut h: Vec<f64> = self.h.iter().map(|x| f1 * x).collect();
        for i in 0..k {
            for j in 0..k {
                h[i * k + j] += f2 * self.g[i] * self.g[j];
            }
        }
        Dual2 { v: f0, g: self.g.iter().map(|x| f1 * x).collect(), h }
    }
}
