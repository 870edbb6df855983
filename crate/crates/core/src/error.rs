use alloc::string::String;
use core::fmt;

/// Errors produced by core operations. Most query paths are total functions;
/// errors are reserved for contract violations (gradients outside the grid,
/// degenerate crops, mismatched buffers, bad configuration).
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A gradient was requested at a point outside the field's bounding box.
    OutOfBounds { position: [f32; 3] },
    /// A crop box covers no lattice vertex of the field.
    EmptyCrop,
    /// Pixel coordinates fall outside the camera's image.
    PixelOutOfRange { px: f32, py: f32, width: u32, height: u32 },
    /// Two image buffers disagree in size.
    DimensionMismatch {
        a: (u32, u32),
        b: (u32, u32),
    },
    /// Requested generator scene name is not in the documented list.
    UnknownScene(String),
    /// A field of a configuration or constructor argument violates its range.
    InvalidArgument {
        field: &'static str,
        reason: &'static str,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::OutOfBounds { position } => write!(
                f,
                "point ({}, {}, {}) lies outside the field bounding box",
                position[0], position[1], position[2]
            ),
            Error::EmptyCrop => write!(f, "crop box covers no lattice vertex"),
            Error::PixelOutOfRange { px, py, width, height } => write!(
                f,
                "pixel ({px}, {py}) outside {width}x{height} image"
            ),
            Error::DimensionMismatch { a, b } => write!(
                f,
                "image dimensions differ: {}x{} vs {}x{}",
                a.0, a.1, b.0, b.1
            ),
            Error::UnknownScene(name) => write!(f, "unknown scene name: {name}"),
            Error::InvalidArgument { field, reason } => {
                write!(f, "invalid {field}: {reason}")
            }
        }
    }
}

impl core::error::Error for Error {}
