//! Parameter buffers that many workers update without locks.
//!
//! Values are stored as raw bits in relaxed atomics. Read-modify-write
//! sequences are not atomic as a whole, so concurrent updates to the same
//! value can overwrite each other; this is the usual racy embedding
//! training trade-off, with no undefined behavior.

use crate::linalg::DenseMatrix;
use crate::Real;

#[cfg(not(feature = "f32"))]
mod bits {
    pub type Atomic = std::sync::atomic::AtomicU64;
    #[inline]
    pub fn to(x: crate::Real) -> u64 {
        x.to_bits()
    }
    #[inline]
    pub fn from(b: u64) -> crate::Real {
        f64::from_bits(b)
    }
}

#[cfg(feature = "f32")]
mod bits {
    pub type Atomic = std::sync::atomic::AtomicU32;
    #[inline]
    pub fn to(x: crate::Real) -> u32 {
        x.to_bits()
    }
    #[inline]
    pub fn from(b: u32) -> crate::Real {
        f32::from_bits(b)
    }
}

use std::sync::atomic::Ordering::Relaxed;

pub(crate) struct SharedBuffer {
    data: Vec<bits::Atomic>,
}

impl SharedBuffer {
    pub fn from_slice(values: &[Real]) -> Self {
        Self {
            data: values.iter().map(|&v| bits::Atomic::new(bits::to(v))).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn read(&self, offset: usize, out: &mut [Real]) {
        let n = out.len();
        for (o, a) in out.iter_mut().zip(&self.data[offset..offset + n]) {
            *o = bits::from(a.load(Relaxed));
        }
    }

    #[inline]
    pub fn write(&self, offset: usize, values: &[Real]) {
        for (v, a) in values.iter().zip(&self.data[offset..offset + values.len()]) {
            a.store(bits::to(*v), Relaxed);
        }
    }

    /// `self[offset..] += alpha * values`
    #[inline]
    pub fn add_scaled(&self, offset: usize, alpha: Real, values: &[Real]) {
        for (v, a) in values.iter().zip(&self.data[offset..offset + values.len()]) {
            let cur = bits::from(a.load(Relaxed));
            a.store(bits::to(cur + alpha * v), Relaxed);
        }
    }

    pub fn to_vec(&self) -> Vec<Real> {
        self.data.iter().map(|a| bits::from(a.load(Relaxed))).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|a| bits::from(a.load(Relaxed)).is_finite())
    }
}

pub(crate) struct SharedMatrix {
    rows: usize,
    cols: usize,
    buf: SharedBuffer,
}

impl SharedMatrix {
    pub fn from_dense(m: &DenseMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            buf: SharedBuffer::from_slice(m.as_slice()),
        }
    }

    #[inline]
    pub fn read_row(&self, row: usize, out: &mut [Real]) {
        debug_assert!(row < self.rows);
        self.buf.read(row * self.cols, out);
    }

    #[inline]
    pub fn add_row(&self, row: usize, alpha: Real, values: &[Real]) {
        debug_assert!(row < self.rows);
        self.buf.add_scaled(row * self.cols, alpha, values);
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_vec(self.rows, self.cols, self.buf.to_vec())
    }

    pub fn all_finite(&self) -> bool {
        self.buf.all_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_updates() {
        let m = SharedMatrix::from_dense(&DenseMatrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]));
        m.add_row(1, -0.5, &[2.0, 2.0]);
        let mut row = [0.0; 2];
        m.read_row(1, &mut row);
        assert_eq!(row, [2.0, 3.0]);
        assert_eq!(m.to_dense().as_slice(), &[1.0, 2.0, 2.0, 3.0]);
    }

    #[test]
    fn concurrent_disjoint_updates_are_exact() {
        let buf = SharedBuffer::from_slice(&[0.0; 8]);
        std::thread::scope(|s| {
            for w in 0..8 {
                let buf = &buf;
                s.spawn(move || {
                    for _ in 0..1000 {
                        buf.add_scaled(w, 1.0, &[1.0]);
                    }
                });
            }
        });
        assert_eq!(buf.to_vec(), vec![1000.0; 8]);
    }
}
