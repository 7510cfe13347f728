//! 2D occupancy rasters and the Minkowski/morphology kernel.
//!
//! A `Raster2D` is a finite window onto the plane: pixel `(i, j)` covers the
//! square `[origin + (i, j) d, origin + (i+1, j+1) d]` and is identified with
//! its center point. Minkowski sums are computed on pixel-center sets, so a
//! raster with origin at an integer multiple of `d` (a "scene" raster) dilated
//! by one whose reference origin sits on a pixel center (a "tool" raster)
//! lands back on the scene lattice exactly.

use bitvec::vec::BitVec;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Absolute tolerance for comparing raster origins (mm).
const ORIGIN_TOL: f64 = 1e-9;
/// Relative tolerance for comparing pixel sizes.
const DELTA_REL_TOL: f64 = 1e-12;
/// Tolerance on lattice alignment, as a fraction of the pixel size.
const LATTICE_TOL: f64 = 1e-6;

/// Binary occupancy raster over a uniform 2D pixel grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster2D {
    origin: [f64; 2],
    delta: f64,
    dims: [usize; 2],
    bits: BitVec,
}

impl Raster2D {
    pub fn new_empty(origin: [f64; 2], delta: f64, dims: [usize; 2]) -> Result<Self> {
        if delta <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "pixel size must be positive, got {delta}"
            )));
        }
        let len = dims[0].checked_mul(dims[1]).ok_or_else(|| {
            Error::InvalidArgument(format!("raster dims {dims:?} overflow"))
        })?;
        let mut bits = BitVec::new();
        bits.resize(len, false);
        Ok(Self {
            origin,
            delta,
            dims,
            bits,
        })
    }

    /// Builds a raster by evaluating `f` at every pixel center.
    pub fn from_fn(
        origin: [f64; 2],
        delta: f64,
        dims: [usize; 2],
        mut f: impl FnMut(f64, f64) -> bool,
    ) -> Result<Self> {
        let mut r = Self::new_empty(origin, delta, dims)?;
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let [u, v] = r.center(i, j);
                if f(u, v) {
                    r.set(i, j, true);
                }
            }
        }
        Ok(r)
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.dims[0] && j < self.dims[1]);
        j * self.dims[0] + i
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let idx = self.index(i, j);
        self.bits.set(idx, value);
    }

    /// World coordinates of the center of pixel `(i, j)`.
    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.delta,
            self.origin[1] + (j as f64 + 0.5) * self.delta,
        ]
    }

    /// Pixel index containing point `(u, v)`, if inside the window.
    pub fn pixel_at(&self, u: f64, v: f64) -> Option<[usize; 2]> {
        let fi = (u - self.origin[0]) / self.delta;
        let fj = (v - self.origin[1]) / self.delta;
        if fi < 0.0 || fj < 0.0 {
            return None;
        }
        let (i, j) = (fi.floor() as usize, fj.floor() as usize);
        if i < self.dims[0] && j < self.dims[1] {
            Some([i, j])
        } else {
            None
        }
    }

    /// True if the pixel containing `(u, v)` is occupied; false outside the window.
    pub fn contains_point(&self, u: f64, v: f64) -> bool {
        self.pixel_at(u, v).is_some_and(|[i, j]| self.get(i, j))
    }

    pub fn occupied_count(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn iter_occupied(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nu = self.dims[0];
        self.bits.iter_ones().map(move |idx| (idx % nu, idx / nu))
    }

    /// Max corner of the raster window in world coordinates.
    pub fn max_corner(&self) -> [f64; 2] {
        [
            self.origin[0] + self.dims[0] as f64 * self.delta,
            self.origin[1] + self.dims[1] as f64 * self.delta,
        ]
    }

    /// World-space bounding box `(min, max)` of occupied pixels, or None if empty.
    pub fn occupied_bounds(&self) -> Option<([f64; 2], [f64; 2])> {
        let mut lo = [usize::MAX; 2];
        let mut hi = [0usize; 2];
        let mut any = false;
        for (i, j) in self.iter_occupied() {
            any = true;
            lo[0] = lo[0].min(i);
            lo[1] = lo[1].min(j);
            hi[0] = hi[0].max(i);
            hi[1] = hi[1].max(j);
        }
        if !any {
            return None;
        }
        Some((
            [
                self.origin[0] + lo[0] as f64 * self.delta,
                self.origin[1] + lo[1] as f64 * self.delta,
            ],
            [
                self.origin[0] + (hi[0] + 1) as f64 * self.delta,
                self.origin[1] + (hi[1] + 1) as f64 * self.delta,
            ],
        ))
    }

    pub fn same_frame(&self, other: &Raster2D) -> bool {
        self.dims == other.dims
            && same_delta(self.delta, other.delta)
            && (self.origin[0] - other.origin[0]).abs() <= ORIGIN_TOL
            && (self.origin[1] - other.origin[1]).abs() <= ORIGIN_TOL
    }

    fn require_same_frame(&self, other: &Raster2D) -> Result<()> {
        if !same_delta(self.delta, other.delta) {
            return Err(Error::PixelSizeMismatch {
                a: self.delta,
                b: other.delta,
            });
        }
        if !self.same_frame(other) {
            return Err(Error::FrameMismatch(format!(
                "origin {:?} dims {:?} vs origin {:?} dims {:?}",
                self.origin, self.dims, other.origin, other.dims
            )));
        }
        Ok(())
    }

    /// Integer lattice offset of `other`'s origin relative to ours, or an error
    /// if the two rasters do not share a pixel lattice.
    pub fn lattice_offset(&self, other: &Raster2D) -> Result<[i64; 2]> {
        if !same_delta(self.delta, other.delta) {
            return Err(Error::PixelSizeMismatch {
                a: self.delta,
                b: other.delta,
            });
        }
        let mut off = [0i64; 2];
        for k in 0..2 {
            let steps = (other.origin[k] - self.origin[k]) / self.delta;
            let rounded = steps.round();
            if (steps - rounded).abs() > LATTICE_TOL {
                return Err(Error::LatticeMismatch(format!(
                    "origin offset {steps} pixels along axis {k} is not an integer"
                )));
            }
            off[k] = rounded as i64;
        }
        Ok(off)
    }

    /// Re-indexes this raster onto a new window of the same lattice. Pixels
    /// falling outside the new window are dropped; new pixels are empty. This
    /// is exact (no resampling) and errors if the lattices are not aligned.
    pub fn embedded(&self, origin: [f64; 2], dims: [usize; 2]) -> Result<Raster2D> {
        let target = Raster2D::new_empty(origin, self.delta, dims)?;
        let off = target.lattice_offset(self)?; // self.origin = target.origin + off * delta
        let mut out = target;
        for (i, j) in self.iter_occupied() {
            let ti = i as i64 + off[0];
            let tj = j as i64 + off[1];
            if ti >= 0 && tj >= 0 && (ti as usize) < dims[0] && (tj as usize) < dims[1] {
                out.set(ti as usize, tj as usize, true);
            }
        }
        Ok(out)
    }

    /// Smallest window covering every input raster (all on one lattice).
    pub fn bounding_frame(rasters: &[&Raster2D]) -> Result<([f64; 2], [usize; 2])> {
        let first = rasters
            .first()
            .ok_or_else(|| Error::InvalidArgument("bounding_frame of no rasters".into()))?;
        let delta = first.delta;
        let mut lo = [i64::MAX; 2];
        let mut hi = [i64::MIN; 2];
        for r in rasters {
            let off = first.lattice_offset(r)?;
            for k in 0..2 {
                lo[k] = lo[k].min(off[k]);
                hi[k] = hi[k].max(off[k] + r.dims[k] as i64);
            }
        }
        let origin = [
            first.origin[0] + lo[0] as f64 * delta,
            first.origin[1] + lo[1] as f64 * delta,
        ];
        let dims = [(hi[0] - lo[0]).max(0) as usize, (hi[1] - lo[1]).max(0) as usize];
        Ok((origin, dims))
    }

    /// Bitwise union; both rasters must share the exact same frame.
    pub fn union(&self, other: &Raster2D) -> Result<Raster2D> {
        self.require_same_frame(other)?;
        let mut out = self.clone();
        out.bits |= other.bits.clone();
        Ok(out)
    }

    /// Bitwise intersection; both rasters must share the exact same frame.
    pub fn intersect(&self, other: &Raster2D) -> Result<Raster2D> {
        self.require_same_frame(other)?;
        let mut out = self.clone();
        out.bits &= other.bits.clone();
        Ok(out)
    }

    /// Bitwise set difference `self - other`; same-frame only.
    pub fn difference(&self, other: &Raster2D) -> Result<Raster2D> {
        self.require_same_frame(other)?;
        let mut out = self.clone();
        for idx in other.bits.iter_ones() {
            out.bits.set(idx, false);
        }
        Ok(out)
    }

    pub fn symmetric_difference_count(&self, other: &Raster2D) -> Result<usize> {
        self.require_same_frame(other)?;
        let mut x = self.bits.clone();
        x ^= other.bits.clone();
        Ok(x.count_ones())
    }

    /// Translates the raster window; the occupancy pattern is unchanged.
    pub fn translated(&self, offset: [f64; 2]) -> Raster2D {
        let mut out = self.clone();
        out.origin = [self.origin[0] + offset[0], self.origin[1] + offset[1]];
        out
    }

    /// Mirror about the line `u = pivot_u`. Lattice-exact when `2 * pivot_u`
    /// is an integer multiple of the pixel size.
    pub fn mirrored_u(&self, pivot_u: f64) -> Raster2D {
        let mut out = Raster2D {
            origin: [
                2.0 * pivot_u - (self.origin[0] + self.dims[0] as f64 * self.delta),
                self.origin[1],
            ],
            delta: self.delta,
            dims: self.dims,
            bits: BitVec::repeat(false, self.bits.len()),
        };
        for (i, j) in self.iter_occupied() {
            out.set(self.dims[0] - 1 - i, j, true);
        }
        out
    }
}

fn same_delta(a: f64, b: f64) -> bool {
    (a - b).abs() <= DELTA_REL_TOL * a.abs().max(b.abs())
}

/// Point reflection about the world origin: pixel center `p` maps to `-p`.
pub fn reflect2d(a: &Raster2D) -> Raster2D {
    let max = a.max_corner();
    let mut out = Raster2D {
        origin: [-max[0], -max[1]],
        delta: a.delta,
        dims: a.dims,
        bits: BitVec::repeat(false, a.bits.len()),
    };
    for (i, j) in a.iter_occupied() {
        out.set(a.dims[0] - 1 - i, a.dims[1] - 1 - j, true);
    }
    out
}

/// Frame of the Minkowski sum `a (+) b` on pixel-center sets.
fn dilation_frame(a: &Raster2D, b: &Raster2D) -> ([f64; 2], [usize; 2]) {
    if a.dims[0] == 0 || a.dims[1] == 0 || b.dims[0] == 0 || b.dims[1] == 0 {
        return ([0.0, 0.0], [0, 0]);
    }
    let origin = [
        a.origin[0] + b.origin[0] + 0.5 * a.delta,
        a.origin[1] + b.origin[1] + 0.5 * a.delta,
    ];
    let dims = [a.dims[0] + b.dims[0] - 1, a.dims[1] + b.dims[1] - 1];
    (origin, dims)
}

fn check_pixel_sizes(a: &Raster2D, b: &Raster2D) -> Result<()> {
    if !same_delta(a.delta, b.delta) {
        return Err(Error::PixelSizeMismatch {
            a: a.delta,
            b: b.delta,
        });
    }
    Ok(())
}

/// Minkowski sum by direct sweep: every occupied pixel of `a` is stamped with
/// every occupied pixel of `b`.
pub fn dilate2d_direct(a: &Raster2D, b: &Raster2D) -> Result<Raster2D> {
    check_pixel_sizes(a, b)?;
    let (origin, dims) = dilation_frame(a, b);
    let mut out = Raster2D::new_empty(origin, a.delta, dims)?;
    if dims[0] == 0 || dims[1] == 0 {
        return Ok(out);
    }
    let b_pixels: Vec<(usize, usize)> = b.iter_occupied().collect();
    for (ai, aj) in a.iter_occupied() {
        for &(bi, bj) in &b_pixels {
            out.set(ai + bi, aj + bj, true);
        }
    }
    Ok(out)
}

/// Minkowski sum via FFT convolution of the indicator images. The accumulated
/// pixel counts are integers, so the result is rounded and thresholded at 0.5
/// before classification; output is bit-identical to the direct sweep.
pub fn dilate2d_fft(a: &Raster2D, b: &Raster2D) -> Result<Raster2D> {
    check_pixel_sizes(a, b)?;
    let (origin, dims) = dilation_frame(a, b);
    let mut out = Raster2D::new_empty(origin, a.delta, dims)?;
    if dims[0] == 0 || dims[1] == 0 || a.is_empty() || b.is_empty() {
        return Ok(out);
    }
    let (mu, mv) = (dims[0], dims[1]);
    let mut fa = indicator_complex(a, mu, mv);
    let mut fb = indicator_complex(b, mu, mv);
    fft2_in_place(&mut fa, mu, mv, false);
    fft2_in_place(&mut fb, mu, mv, false);
    for (x, y) in fa.iter_mut().zip(fb.iter()) {
        *x *= *y;
    }
    fft2_in_place(&mut fa, mu, mv, true);
    let scale = 1.0 / (mu as f64 * mv as f64);
    for j in 0..mv {
        for i in 0..mu {
            let count = (fa[j * mu + i].re * scale).round();
            if count >= 0.5 {
                out.set(i, j, true);
            }
        }
    }
    Ok(out)
}

/// Minkowski sum `a (+) b`, choosing the cheaper implementation.
pub fn dilate2d(a: &Raster2D, b: &Raster2D) -> Result<Raster2D> {
    // Direct sweep costs |a| * |b| pixel stamps; FFT costs ~ 3 transforms of
    // the padded window. Crossover chosen coarsely.
    let sweep_cost = a.occupied_count() as u64 * b.occupied_count() as u64;
    let (_, dims) = dilation_frame(a, b);
    let n = (dims[0] * dims[1]) as u64;
    let fft_cost = 6 * n * (64 - n.leading_zeros() as u64).max(1);
    if sweep_cost <= fft_cost {
        dilate2d_direct(a, b)
    } else {
        dilate2d_fft(a, b)
    }
}

fn indicator_complex(r: &Raster2D, mu: usize, mv: usize) -> Vec<Complex<f64>> {
    let mut buf = vec![Complex::new(0.0, 0.0); mu * mv];
    for (i, j) in r.iter_occupied() {
        buf[j * mu + i] = Complex::new(1.0, 0.0);
    }
    buf
}

/// In-place 2D FFT over a row-major `mu x mv` complex buffer (rows of length `mu`).
fn fft2_in_place(buf: &mut [Complex<f64>], mu: usize, mv: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft_u = if inverse {
        planner.plan_fft_inverse(mu)
    } else {
        planner.plan_fft_forward(mu)
    };
    let fft_v = if inverse {
        planner.plan_fft_inverse(mv)
    } else {
        planner.plan_fft_forward(mv)
    };
    for row in buf.chunks_exact_mut(mu) {
        fft_u.process(row);
    }
    let mut transposed = vec![Complex::new(0.0, 0.0); mu * mv];
    for j in 0..mv {
        for i in 0..mu {
            transposed[i * mv + j] = buf[j * mu + i];
        }
    }
    for col in transposed.chunks_exact_mut(mv) {
        fft_v.process(col);
    }
    for j in 0..mv {
        for i in 0..mu {
            buf[j * mu + i] = transposed[i * mv + j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raster_from_bits(origin: [f64; 2], delta: f64, rows: &[&[u8]]) -> Raster2D {
        // rows[0] is the v = 0 row.
        let nv = rows.len();
        let nu = rows[0].len();
        let mut r = Raster2D::new_empty(origin, delta, [nu, nv]).unwrap();
        for (j, row) in rows.iter().enumerate() {
            for (i, &b) in row.iter().enumerate() {
                if b != 0 {
                    r.set(i, j, true);
                }
            }
        }
        r
    }

    /// Single pixel whose center is at the world origin.
    fn impulse(delta: f64) -> Raster2D {
        let mut r = Raster2D::new_empty([-0.5 * delta, -0.5 * delta], delta, [1, 1]).unwrap();
        r.set(0, 0, true);
        r
    }

    #[test]
    fn impulse_response_is_structuring_element() {
        // single pixel (+) 3x3 square centered at the origin -> 3x3 block
        let d = 1.0;
        let mut point = Raster2D::new_empty([5.0, 5.0], d, [1, 1]).unwrap();
        point.set(0, 0, true);
        let square = raster_from_bits(
            [-1.5, -1.5],
            d,
            &[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]],
        );
        let out = dilate2d_direct(&point, &square).unwrap();
        assert_eq!(out.dims(), [3, 3]);
        assert_eq!(out.occupied_count(), 9);
        // Block centered on the original pixel center (5.5, 5.5).
        assert_eq!(out.center(1, 1), [5.5, 5.5]);
    }

    #[test]
    fn dilation_identity_element() {
        let a = raster_from_bits([2.0, -3.0], 0.5, &[&[1, 0, 1], &[0, 1, 0]]);
        let e = impulse(0.5);
        let out = dilate2d_direct(&a, &e).unwrap();
        assert!(out.same_frame(&a));
        assert_eq!(out, a);
        let out_fft = dilate2d_fft(&a, &e).unwrap();
        assert_eq!(out_fft, a);
    }

    #[test]
    fn reflection_point() {
        // single pixel centered at (2.5, 1.5) -> single pixel centered at (-2.5, -1.5)
        let mut a = Raster2D::new_empty([2.0, 1.0], 1.0, [1, 1]).unwrap();
        a.set(0, 0, true);
        let r = reflect2d(&a);
        assert_eq!(r.occupied_count(), 1);
        assert_eq!(r.center(0, 0), [-2.5, -1.5]);
    }

    #[test]
    fn reflection_involution() {
        let a = raster_from_bits([0.25, -1.0], 0.25, &[&[1, 1, 0, 0], &[0, 1, 1, 0]]);
        assert_eq!(reflect2d(&reflect2d(&a)), a);
    }

    #[test]
    fn reflection_of_symmetric_set_is_identity() {
        // 2x2 block centered at the origin.
        let a = raster_from_bits([-1.0, -1.0], 1.0, &[&[1, 1], &[1, 1]]);
        assert_eq!(reflect2d(&a), a);
    }

    #[test]
    fn pixel_size_mismatch_rejected() {
        let a = impulse(1.0);
        let b = impulse(0.5);
        assert!(matches!(
            dilate2d_direct(&a, &b),
            Err(Error::PixelSizeMismatch { .. })
        ));
    }

    #[test]
    fn set_ops_require_same_frame() {
        let a = impulse(1.0);
        let b = a.translated([1.0, 0.0]);
        assert!(matches!(a.union(&b), Err(Error::FrameMismatch(_))));
        assert!(a.union(&a).is_ok());
    }

    #[test]
    fn embedding_is_exact() {
        let a = raster_from_bits([1.0, 2.0], 0.5, &[&[1, 0], &[0, 1]]);
        let big = a.embedded([0.0, 0.0], [8, 10]).unwrap();
        assert_eq!(big.occupied_count(), 2);
        assert!(big.get(2, 4)); // (1.0,2.0) offset = 2,4 pixels
        assert!(big.get(3, 5));
        let back = big.embedded([1.0, 2.0], [2, 2]).unwrap();
        assert_eq!(back, a);
        // Misaligned origin is rejected.
        assert!(a.embedded([0.1, 0.0], [8, 10]).is_err());
    }

    #[test]
    fn dilation_commutes_and_associates() {
        let a = raster_from_bits([0.0, 0.0], 1.0, &[&[1, 0, 1], &[1, 1, 0]]);
        let b = raster_from_bits([-1.0, -1.0], 1.0, &[&[1, 1], &[0, 1]]);
        let c = raster_from_bits([3.0, 2.0], 1.0, &[&[1], &[1]]);
        let ab = dilate2d_direct(&a, &b).unwrap();
        let ba = dilate2d_direct(&b, &a).unwrap();
        assert_eq!(ab, ba);
        let ab_c = dilate2d_direct(&ab, &c).unwrap();
        let a_bc = dilate2d_direct(&a, &dilate2d_direct(&b, &c).unwrap()).unwrap();
        assert_eq!(ab_c, a_bc);
    }

    #[test]
    fn empty_inputs_give_empty_output() {
        let a = Raster2D::new_empty([0.0, 0.0], 1.0, [4, 4]).unwrap();
        let b = impulse(1.0);
        let d = dilate2d_direct(&a, &b).unwrap();
        assert!(d.is_empty());
        let f = dilate2d_fft(&a, &b).unwrap();
        assert_eq!(d, f);
        let zero = Raster2D::new_empty([0.0, 0.0], 1.0, [0, 0]).unwrap();
        assert_eq!(dilate2d_direct(&zero, &b).unwrap().dims(), [0, 0]);
        assert_eq!(dilate2d_fft(&zero, &b).unwrap().dims(), [0, 0]);
    }

    #[test]
    fn mirror_u_maps_centers() {
        let mut a = Raster2D::new_empty([0.0, 0.0], 1.0, [4, 1]).unwrap();
        a.set(0, 0, true); // center u = 0.5
        let m = a.mirrored_u(2.0); // u -> 4 - u, so 0.5 -> 3.5
        assert_eq!(m.origin(), [0.0, 0.0]);
        assert!(m.get(3, 0));
        assert_eq!(m.occupied_count(), 1);
        // Involution.
        assert_eq!(m.mirrored_u(2.0), a);
    }
}
