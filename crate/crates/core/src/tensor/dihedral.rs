//! The eight flips/rotations of the square (dihedral group D4).

use super::Image;

/// Element of D4, stored as `index = 4 * flip + rot`.
///
/// The element acts on an image by rotating `rot` quarter turns
/// counter-clockwise and then, if `flip` is set, mirroring left-right.
/// Indices 0..8 therefore enumerate: identity, rot90, rot180, rot270, flip,
/// flip∘rot90, flip∘rot180, flip∘rot270.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dihedral8(u8);

impl Dihedral8 {
    pub const IDENTITY: Dihedral8 = Dihedral8(0);

    pub fn new(index: usize) -> Option<Self> {
        (index < 8).then_some(Dihedral8(index as u8))
    }

    pub fn all() -> impl Iterator<Item = Dihedral8> {
        (0..8).map(Dihedral8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn rotation(self) -> u8 {
        self.0 % 4
    }

    pub fn flipped(self) -> bool {
        self.0 >= 4
    }

    fn from_parts(flip: bool, rot: u8) -> Self {
        Dihedral8(u8::from(flip) * 4 + rot % 4)
    }

    /// `self.then(other)` applies `self` first, then `other`.
    pub fn then(self, other: Dihedral8) -> Dihedral8 {
        // other ∘ self = F^f2 R^r2 F^f1 R^r1, using R F = F R^-1.
        let (f1, r1) = (self.flipped(), self.rotation());
        let (f2, r2) = (other.flipped(), other.rotation());
        if f1 {
            Dihedral8::from_parts(!f2, (r1 + 4 - r2) % 4)
        } else {
            Dihedral8::from_parts(f2, (r1 + r2) % 4)
        }
    }

    pub fn inverse(self) -> Dihedral8 {
        if self.flipped() {
            self
        } else {
            Dihedral8::from_parts(false, (4 - self.rotation()) % 4)
        }
    }

    pub fn apply(self, img: &Image) -> Image {
        let mut out = img.clone();
        for _ in 0..self.rotation() {
            out = rot90(&out);
        }
        if self.flipped() {
            out = flip_lr(&out);
        }
        out
    }
}

fn rot90(img: &Image) -> Image {
    let (c, h, w) = img.shape();
    Image::from_fn(c, w, h, |ch, i, j| img.get(ch, j, w - 1 - i))
}

fn flip_lr(img: &Image) -> Image {
    let (c, h, w) = img.shape();
    Image::from_fn(c, h, w, |ch, i, j| img.get(ch, i, w - 1 - j))
}
