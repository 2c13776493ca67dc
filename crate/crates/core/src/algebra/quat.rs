use num_complex::Complex64;

/// A quaternion w + xi + yj + zk, used when generating and folding back
/// quaternionic matrices. Heavy lifting happens on the complex embedding;
/// this type only has to support construction, products and norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const ZERO: Quat = Quat { w: 0.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const ONE: Quat = Quat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    pub fn from_real(w: f64) -> Self {
        Quat { w, x: 0.0, y: 0.0, z: 0.0 }
    }

    pub fn conj(self) -> Self {
        Quat { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn norm_sq(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn scale(self, s: f64) -> Self {
        Quat { w: self.w * s, x: self.x * s, y: self.y * s, z: self.z * s }
    }

    pub fn mul(self, o: Quat) -> Quat {
        Quat {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
    }

    pub fn add(self, o: Quat) -> Quat {
        Quat { w: self.w + o.w, x: self.x + o.x, y: self.y + o.y, z: self.z + o.z }
    }

    pub fn sub(self, o: Quat) -> Quat {
        Quat { w: self.w - o.w, x: self.x - o.x, y: self.y - o.y, z: self.z - o.z }
    }

    /// First row of the 2×2 complex block: (α, β) with α = w + xi, β = y + zi.
    pub fn block_row(self) -> (Complex64, Complex64) {
        (Complex64::new(self.w, self.x), Complex64::new(self.y, self.z))
    }

    /// Rebuild a quaternion from the top row of its complex block.
    pub fn from_block_row(alpha: Complex64, beta: Complex64) -> Self {
        Quat { w: alpha.re, x: alpha.im, y: beta.re, z: beta.im }
    }
}
