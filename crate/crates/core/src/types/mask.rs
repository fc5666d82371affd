use std::collections::BTreeSet;

use super::ShapeError;

/// A row-major binary segmentation mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    /// An all-false mask.
    pub fn empty(height: usize, width: usize) -> Result<Self, ShapeError> {
        Self::check_dims(height, width)?;
        Ok(Self {
            height,
            width,
            bits: vec![false; height * width],
        })
    }

    /// An all-true mask.
    pub fn full(height: usize, width: usize) -> Result<Self, ShapeError> {
        Self::check_dims(height, width)?;
        Ok(Self {
            height,
            width,
            bits: vec![true; height * width],
        })
    }

    pub fn from_bits(height: usize, width: usize, bits: Vec<bool>) -> Result<Self, ShapeError> {
        Self::check_dims(height, width)?;
        if bits.len() != height * width {
            return Err(ShapeError::LengthMismatch {
                height,
                width,
                expected: height * width,
                actual: bits.len(),
            });
        }
        Ok(Self { height, width, bits })
    }

    /// Builds a mask from a predicate over `(row, col)`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self, ShapeError> {
        Self::check_dims(height, width)?;
        let mut bits = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                bits.push(f(r, c));
            }
        }
        Ok(Self { height, width, bits })
    }

    fn check_dims(height: usize, width: usize) -> Result<(), ShapeError> {
        if height == 0 || width == 0 {
            return Err(ShapeError::EmptyDimensions { height, width });
        }
        Ok(())
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn area(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Fails unless `other` has the same dimensions.
    pub fn ensure_same_dims(&self, other: &BinaryMask) -> Result<(), ShapeError> {
        if self.dims() != other.dims() {
            return Err(ShapeError::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }

    pub fn intersection_area(&self, other: &BinaryMask) -> Result<usize, ShapeError> {
        self.ensure_same_dims(other)?;
        Ok(self.bits.iter().zip(&other.bits).filter(|(a, b)| **a && **b).count())
    }

    pub fn union_area(&self, other: &BinaryMask) -> Result<usize, ShapeError> {
        self.ensure_same_dims(other)?;
        Ok(self.bits.iter().zip(&other.bits).filter(|(a, b)| **a || **b).count())
    }

    pub fn union(&self, other: &BinaryMask) -> Result<BinaryMask, ShapeError> {
        self.ensure_same_dims(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect();
        Ok(BinaryMask {
            height: self.height,
            width: self.width,
            bits,
        })
    }

    /// Iterates `(row, col)` of every true pixel in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| (i / w, i % w))
    }
}

pub fn mask_area(m: &BinaryMask) -> usize {
    m.area()
}

pub fn mask_equal(a: &BinaryMask, b: &BinaryMask) -> bool {
    a == b
}

/// Per-pixel integer object labels for one annotated frame; 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelGrid {
    height: usize,
    width: usize,
    labels: Vec<u8>,
}

impl LabelGrid {
    pub fn new(height: usize, width: usize, labels: Vec<u8>) -> Result<Self, ShapeError> {
        if height == 0 || width == 0 {
            return Err(ShapeError::EmptyDimensions { height, width });
        }
        if labels.len() != height * width {
            return Err(ShapeError::LengthMismatch {
                height,
                width,
                expected: height * width,
                actual: labels.len(),
            });
        }
        Ok(Self { height, width, labels })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Distinct non-zero labels present in the grid.
    pub fn present_labels(&self) -> BTreeSet<u8> {
        self.labels.iter().copied().filter(|&l| l != 0).collect()
    }

    /// Binary mask of pixels whose label is in `ids`.
    pub fn select(&self, ids: &BTreeSet<u32>) -> BinaryMask {
        let bits = self
            .labels
            .iter()
            .map(|&l| l != 0 && ids.contains(&u32::from(l)))
            .collect();
        BinaryMask {
            height: self.height,
            width: self.width,
            bits,
        }
    }
}
