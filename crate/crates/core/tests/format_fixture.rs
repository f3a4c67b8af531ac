//! Byte-level fixture for the feature file layout.

use voxblend_core::featstore::{decode_features, encode_features};
use voxblend_core::Matrix;

const GOLDEN: [u8; 48] = [
    b'S', b'A', b'L', b'T', b'F', b'E', b'A', b'T', // magic
    1, 0, 0, 0, // version
    3, 0, 0, 0, // dims
    2, 0, 0, 0, 0, 0, 0, 0, // frames
    0x00, 0x00, 0x80, 0x3f, // 1.0
    0x00, 0x00, 0x00, 0xc0, // -2.0
    0x00, 0x00, 0x00, 0x3f, // 0.5
    0x00, 0x00, 0x00, 0x00, // 0.0
    0x00, 0x00, 0x40, 0x40, // 3.0
    0x00, 0x00, 0x80, 0xbe, // -0.25
];

#[test]
fn encodes_to_golden_bytes() {
    let m = Matrix::from_rows(&[[1.0f32, -2.0, 0.5], [0.0, 3.0, -0.25]]).unwrap();
    assert_eq!(encode_features(&m).unwrap(), GOLDEN);
}

#[test]
fn decodes_golden_bytes() {
    let m: Matrix<f32> = decode_features(&GOLDEN, "golden".as_ref()).unwrap();
    assert_eq!(m.shape(), (2, 3));
    assert_eq!(m.row(1), [0.0, 3.0, -0.25]);
    // Widening on read is exact.
    let w: Matrix<f64> = decode_features(&GOLDEN, "golden".as_ref()).unwrap();
    assert_eq!(w.row(0), [1.0, -2.0, 0.5]);
}
