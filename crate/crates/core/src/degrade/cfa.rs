use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::tensor::Image;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    R = 0,
    G = 1,
    B = 2,
}

impl Channel {
    pub fn index(self) -> usize {
        self as usize
    }
}

/// 2×2 Bayer tile, read row-major: `RGGB` puts red at (0, 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CfaPattern {
    tile: [[Channel; 2]; 2],
}

impl CfaPattern {
    pub const RGGB: CfaPattern = CfaPattern {
        tile: [[Channel::R, Channel::G], [Channel::G, Channel::B]],
    };

    pub fn new(tile: [[Channel; 2]; 2]) -> Result<Self> {
        let count = |ch| tile.iter().flatten().filter(|&&c| c == ch).count();
        if count(Channel::R) != 1 || count(Channel::B) != 1 || count(Channel::G) != 2 {
            return Err(Error::invalid(
                "a Bayer tile needs exactly one R, one B and two G",
            ));
        }
        Ok(Self { tile })
    }

    #[inline]
    pub fn channel_at(&self, i: usize, j: usize) -> Channel {
        self.tile[i % 2][j % 2]
    }
}

impl Default for CfaPattern {
    fn default() -> Self {
        Self::RGGB
    }
}

impl FromStr for CfaPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chans: Vec<Channel> = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'R' => Ok(Channel::R),
                'G' => Ok(Channel::G),
                'B' => Ok(Channel::B),
                other => Err(Error::invalid(format!("bad CFA letter {other:?}"))),
            })
            .collect::<Result<_>>()?;
        if chans.len() != 4 {
            return Err(Error::invalid(format!("CFA pattern {s:?} must have 4 letters")));
        }
        Self::new([[chans[0], chans[1]], [chans[2], chans[3]]])
    }
}

impl fmt::Display for CfaPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.tile.iter().flatten() {
            let ch = match c {
                Channel::R => 'R',
                Channel::G => 'G',
                Channel::B => 'B',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

/// Binary 3-channel mask with exactly one observed channel per pixel.
pub fn cfa_mask(pattern: CfaPattern, height: usize, width: usize) -> Image {
    Image::from_fn(3, height, width, |c, i, j| {
        f64::from(u8::from(pattern.channel_at(i, j).index() == c))
    })
}

/// `M ⊙ x` for a 3-channel image.
pub fn mosaic(img: &Image, pattern: CfaPattern) -> Result<Image> {
    if img.channels() != 3 {
        return Err(Error::shape(format!(
            "mosaicing needs 3 channels, got {}",
            img.channels()
        )));
    }
    img.zip_map(&cfa_mask(pattern, img.height(), img.width()), |v, m| v * m)
}
