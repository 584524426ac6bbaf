//! Float helpers that work both with and without `std`.

#[cfg(feature = "std")]
macro_rules! shim {
    ($name:ident, $method:ident) => {
        #[inline]
        pub fn $name(x: f64) -> f64 {
            x.$method()
        }
    };
}

#[cfg(not(feature = "std"))]
macro_rules! shim {
    ($name:ident, $method:ident) => {
        #[inline]
        pub fn $name(x: f64) -> f64 {
            libm::$name(x)
        }
    };
}

shim!(sqrt, sqrt);
shim!(exp, exp);
shim!(log, ln);
shim!(fabs, abs);
shim!(floor, floor);
shim!(ceil, ceil);
shim!(round, round);

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.hypot(y)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::hypot(x, y)
    }
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    #[cfg(feature = "std")]
    {
        x.powi(n)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::pow(x, n as f64)
    }
}

/// Euclidean norm of a slice.
pub fn norm(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}

/// Euclidean distance between two slices of equal length.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Standard scalar product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
