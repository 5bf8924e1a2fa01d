use motionbrush::ingest::{decode_frame, encode_frame, DecodeError, Decoded, StreamDecoder, FRAME_LEN};
use motionbrush::motion::SensorFrame;
use proptest::prelude::*;

const GOLDEN_HEX: &str = include_str!("fixtures/identity_frame.hex");

fn golden() -> Vec<u8> {
    let hex = GOLDEN_HEX.trim();
    (0..hex.len()).step_by(2).map(|i| u8::from_str_radix(&hex[i..i + 2], 16).unwrap()).collect()
}

/// Bit-at-a-time reflected CRC-32, polynomial 0xEDB88320.
fn crc32_oracle(bytes: &[u8]) -> u32 {
    let mut crc = 0xFFFF_FFFFu32;
    for &b in bytes {
        crc ^= u32::from(b);
        for _ in 0..8 {
            crc = if crc & 1 == 1 { (crc >> 1) ^ 0xEDB8_8320 } else { crc >> 1 };
        }
    }
    !crc
}

/// The layout table, assembled by hand.
fn layout_oracle(f: &SensorFrame) -> Vec<u8> {
    let mut b = vec![0xA1, 0x53, 0x01, f.device_id];
    b.extend(f.seq.to_le_bytes());
    b.extend(f.t_us.to_le_bytes());
    for v in f.quat.iter().chain(f.acc.iter()) {
        b.extend(v.to_le_bytes());
    }
    let crc = crc32_oracle(&b);
    b.extend(crc.to_le_bytes());
    b
}

fn identity() -> SensorFrame {
    SensorFrame { device_id: 0, seq: 0, t_us: 0, quat: [1.0, 0.0, 0.0, 0.0], acc: [0.0; 3] }
}

prop_compose! {
    fn frames()(
        device_id in 0u8..4,
        seq in any::<u32>(),
        t_us in any::<u64>(),
        axis in prop::array::uniform3(-1.0f64..1.0),
        angle in -std::f64::consts::PI..std::f64::consts::PI,
        acc in prop::array::uniform3(-200.0f32..=200.0),
    ) -> SensorFrame {
        let (s, c) = (angle / 2.0).sin_cos();
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt().max(1e-9);
        let quat = [c as f32, (s * axis[0] / n) as f32, (s * axis[1] / n) as f32, (s * axis[2] / n) as f32];
        SensorFrame { device_id, seq, t_us, quat, acc }
    }
}

#[test]
fn golden_vector_matches_layout_and_decodes_to_identity_frame() {
    let g = golden();
    assert_eq!(g.len(), FRAME_LEN);
    assert_eq!(g, layout_oracle(&identity()));
    assert_eq!(encode_frame(&identity()).unwrap().to_vec(), g);
    assert_eq!(decode_frame(&g), Ok(Decoded::Frame(identity())));
}

#[test]
fn truncated_input_asks_for_more() {
    assert_eq!(decode_frame(&golden()[..47]), Ok(Decoded::Incomplete { needed: 1 }));
}

#[test]
fn every_single_byte_corruption_is_rejected() {
    let g = golden();
    for i in 0..FRAME_LEN {
        for flip in [0x01u8, 0x80, 0xFF] {
            let mut b = g.clone();
            b[i] ^= flip;
            let err = decode_frame(&b).expect_err("corrupted frame decoded");
            if (3..44).contains(&i) {
                assert!(matches!(err, DecodeError::BadCrc { .. }), "byte {i}: {err}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn round_trip_is_bit_exact(f in frames()) {
        let bytes = encode_frame(&f).unwrap();
        prop_assert_eq!(bytes.to_vec(), layout_oracle(&f));
        let Decoded::Frame(back) = decode_frame(&bytes).unwrap() else { panic!("incomplete") };
        prop_assert_eq!(back.device_id, f.device_id);
        prop_assert_eq!(back.seq, f.seq);
        prop_assert_eq!(back.t_us, f.t_us);
        prop_assert_eq!(back.quat.map(f32::to_bits), f.quat.map(f32::to_bits));
        prop_assert_eq!(back.acc.map(f32::to_bits), f.acc.map(f32::to_bits));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    /// Any 48 bytes decode to a valid frame or a typed error.
    #[test]
    fn decoding_is_total(bytes in prop::collection::vec(any::<u8>(), FRAME_LEN)) {
        match decode_frame(&bytes) {
            Ok(Decoded::Frame(f)) => prop_assert!(f.validate().is_ok()),
            Ok(Decoded::Incomplete { .. }) => prop_assert!(false, "48 bytes reported incomplete"),
            Err(e) => prop_assert!(!e.code().is_empty()),
        }
    }

    /// Random bytes with a valid trailer still run the full validation.
    #[test]
    fn crc_valid_garbage_is_validated(body in prop::collection::vec(any::<u8>(), 40)) {
        let mut b = vec![0xA1, 0x53, 0x01, 0x00];
        b.extend(&body);
        let crc = crc32_oracle(&b);
        b.extend(crc.to_le_bytes());
        if let Ok(Decoded::Frame(f)) = decode_frame(&b) {
            prop_assert!(f.validate().is_ok());
        }
    }

    #[test]
    fn stream_decoder_recovers_frames_between_garbage(
        fs in prop::collection::vec(frames(), 1..20),
        junk in prop::collection::vec(prop::collection::vec(any::<u8>(), 0..30), 20),
        chunk in 1usize..97,
    ) {
        let mut stream = Vec::new();
        for (f, j) in fs.iter().zip(&junk) {
            stream.extend(j.iter().map(|b| if *b == 0xA1 { 0 } else { *b }));
            stream.extend(encode_frame(f).unwrap());
        }
        let mut dec = StreamDecoder::new();
        let mut got = Vec::new();
        for piece in stream.chunks(chunk) {
            dec.push(piece);
            while let Some(r) = dec.next_frame() {
                if let Ok(f) = r {
                    got.push(f);
                }
            }
        }
        prop_assert_eq!(got, fs);
    }
}
