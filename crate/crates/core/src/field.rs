//! Image and signal grids shared by every processing layer.
//!
//! All grids are row-major, indexed `(x, y)` with `x` the column and `y`
//! the row. Spatial filtering uses true 2-D convolution with replicate-edge
//! padding, so a spatially uniform input stays uniform up to the kernel sum.

use crate::error::{Error, Result};

/// 8-bit luminance image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "frame buffer holds {} pixels, expected {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, luminance: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![luminance; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    /// Left-right mirror image.
    pub fn mirrored(&self) -> Self {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for row in self.pixels.chunks_exact(self.width) {
            pixels.extend(row.iter().rev());
        }
        Self {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    pub fn check_dims(&self, width: usize, height: usize) -> Result<()> {
        if self.width != width || self.height != height {
            return Err(Error::DimensionMismatch {
                expected_w: width,
                expected_h: height,
                got_w: self.width,
                got_h: self.height,
            });
        }
        Ok(())
    }
}

/// Real-valued grid with the same layout as a [`Frame`].
#[derive(Debug, Clone, PartialEq)]
pub struct SignalField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl SignalField {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "field buffer holds {} values, expected {}x{}",
                values.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.values[y * self.width + x] = value;
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn mirrored(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for row in self.values.chunks_exact(self.width) {
            values.extend(row.iter().rev());
        }
        Self {
            width: self.width,
            height: self.height,
            values,
        }
    }

    pub fn same_shape(&self, other: &SignalField) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Parallel ON (increment) and OFF (decrement) channels.
#[derive(Debug, Clone, PartialEq)]
pub struct OnOffField {
    pub on: SignalField,
    pub off: SignalField,
}

impl OnOffField {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            on: SignalField::zeros(width, height),
            off: SignalField::zeros(width, height),
        }
    }

    pub fn width(&self) -> usize {
        self.on.width()
    }

    pub fn height(&self) -> usize {
        self.on.height()
    }

    pub fn mirrored(&self) -> Self {
        Self {
            on: self.on.mirrored(),
            off: self.off.mirrored(),
        }
    }
}

/// Square, odd-sized convolution kernel.
///
/// Rank-one kernels are detected on construction and applied as two 1-D
/// passes; everything else goes through the direct 2-D loop.
#[derive(Debug, Clone)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
    separable: Option<(Vec<f64>, Vec<f64>)>,
}

impl PartialEq for Kernel {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size && self.weights == other.weights
    }
}

impl Kernel {
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size.is_multiple_of(2) || size * size != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "kernel needs an odd square size, got {} weights for side {}",
                weights.len(),
                size
            )));
        }
        let separable = factor_rank_one(size, &weights);
        Ok(Self {
            size,
            weights,
            separable,
        })
    }

    /// Builds a kernel from a row-major weight list whose length is an odd square.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let side = (weights.len() as f64).sqrt().round() as usize;
        Self::new(side, weights)
    }

    /// Outer product `column ⊗ row`.
    pub fn outer(column: &[f64], row: &[f64]) -> Result<Self> {
        if column.len() != row.len() {
            return Err(Error::InvalidArgument(
                "outer-product kernel factors differ in length".into(),
            ));
        }
        let weights = column
            .iter()
            .flat_map(|c| row.iter().map(move |r| c * r))
            .collect();
        Self::new(row.len(), weights)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Tap at offset `(dx, dy)` from the centre.
    pub fn tap(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius() as isize;
        self.weights[((dy + r) * self.size as isize + dx + r) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_separable(&self) -> bool {
        self.separable.is_some()
    }

    /// Convolves `input` with this kernel, replicating edge cells outward.
    pub fn convolve(&self, input: &SignalField) -> SignalField {
        let mut out = SignalField::zeros(input.width(), input.height());
        self.convolve_into(input, &mut out);
        out
    }

    pub fn convolve_into(&self, input: &SignalField, out: &mut SignalField) {
        debug_assert!(input.same_shape(out));
        match &self.separable {
            Some((column, row)) => convolve_separable(input, column, row, out),
            None => convolve_direct(input, self, out),
        }
    }
}

fn factor_rank_one(size: usize, weights: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let (pivot, pivot_value) = weights
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?;
    if pivot_value == 0.0 {
        return None;
    }
    let (pr, pc) = (pivot / size, pivot % size);
    let column: Vec<f64> = (0..size).map(|r| weights[r * size + pc]).collect();
    let row: Vec<f64> = (0..size)
        .map(|c| weights[pr * size + c] / pivot_value)
        .collect();
    let scale = pivot_value.abs();
    for r in 0..size {
        for c in 0..size {
            if (column[r] * row[c] - weights[r * size + c]).abs() > 1e-14 * scale {
                return None;
            }
        }
    }
    Some((column, row))
}

#[inline]
fn clamp_index(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

fn convolve_direct(input: &SignalField, kernel: &Kernel, out: &mut SignalField) {
    let (w, h) = (input.width(), input.height());
    let r = kernel.radius() as isize;
    let src = input.values();
    let dst = out.values_mut();
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for dy in -r..=r {
                let sy = clamp_index(y as isize - dy, h);
                let row = &src[sy * w..(sy + 1) * w];
                for dx in -r..=r {
                    let sx = clamp_index(x as isize - dx, w);
                    acc += kernel.tap(dx, dy) * row[sx];
                }
            }
            dst[y * w + x] = acc;
        }
    }
}

fn convolve_separable(input: &SignalField, column: &[f64], row: &[f64], out: &mut SignalField) {
    let (w, h) = (input.width(), input.height());
    let r = (row.len() / 2) as isize;
    let src = input.values();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let line = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, weight) in row.iter().enumerate() {
                let dx = k as isize - r;
                acc += weight * line[clamp_index(x as isize - dx, w)];
            }
            tmp[y * w + x] = acc;
        }
    }
    let dst = out.values_mut();
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, weight) in column.iter().enumerate() {
                let dy = k as isize - r;
                acc += weight * tmp[clamp_index(y as isize - dy, h) * w + x];
            }
            dst[y * w + x] = acc;
        }
    }
}
