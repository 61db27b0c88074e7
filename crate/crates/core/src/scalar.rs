//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating point scalar: `f32` or `f64`.
///
/// All tolerances in the crate are written in `f64` terms and pass through
/// [`Real::tol`], which floors them at a small multiple of the type's machine
/// epsilon so the same checks stay meaningful in single precision.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Send + Sync + 'static
{
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn tol(x: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(256.0);
        let t = Self::lit(x);
        if t > floor {
            t
        } else {
            floor
        }
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;
pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// `exp(i·theta)`.
#[inline]
pub(crate) fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub(crate) fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    cis(z.im) * z.re.exp()
}

pub(crate) fn max_abs_entry<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| {
        let n = z.norm_sqr().sqrt();
        if n > acc {
            n
        } else {
            acc
        }
    })
}

/// `Tr[XY]` without forming the product.
pub fn trace_product<T: Real>(x: &CMatrix<T>, y: &CMatrix<T>) -> Complex<T> {
    let dim = x.nrows();
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..dim {
        for j in 0..dim {
            acc += x[(i, j)] * y[(j, i)];
        }
    }
    acc
}

/// Real part of [`trace_product`]; exact for a product of two Hermitian matrices.
pub fn trace_product_re<T: Real>(x: &CMatrix<T>, y: &CMatrix<T>) -> T {
    trace_product(x, y).re
}
